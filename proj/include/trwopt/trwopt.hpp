#pragma once

#include "trwopt/error.hpp"
#include "trwopt/io.hpp"
#include "trwopt/line_search.hpp"
#include "trwopt/masks.hpp"
#include "trwopt/metrics.hpp"
#include "trwopt/synthetic.hpp"
#include "trwopt/tensor.hpp"
#include "trwopt/tensorize.hpp"
#include "trwopt/tr_cores.hpp"
#include "trwopt/wopt.hpp"
