#pragma once

#include "cbdx/curve.hpp"
#include "cbdx/decision.hpp"
#include "cbdx/error.hpp"
#include "cbdx/evaluation.hpp"
#include "cbdx/inference.hpp"
#include "cbdx/interface.hpp"
#include "cbdx/json_io.hpp"
#include "cbdx/kb_format.hpp"
#include "cbdx/kb_model.hpp"
#include "cbdx/simulate.hpp"
#include "cbdx/temporal.hpp"
