#pragma once

#include "errors.hpp"
#include "date.hpp"
#include "csv.hpp"
#include "filter_design.hpp"
#include "state_space.hpp"
#include "vol_estimators.hpp"
#include "factor_pipeline.hpp"
#include "market_data.hpp"
#include "synthetic.hpp"
#include "backtest.hpp"
#include "metrics.hpp"
#include "scoring.hpp"
#include "config.hpp"
#include "report.hpp"
#include "commands.hpp"
