#ifndef EXSEL_EXSEL_HPP_
#define EXSEL_EXSEL_HPP_

#include "exsel/classify.hpp"
#include "exsel/cluster.hpp"
#include "exsel/dataset.hpp"
#include "exsel/error.hpp"
#include "exsel/ffs.hpp"
#include "exsel/geometry.hpp"
#include "exsel/lasso.hpp"
#include "exsel/metrics.hpp"
#include "exsel/random.hpp"
#include "exsel/selfrep.hpp"
#include "exsel/simplex.hpp"

#endif  // EXSEL_EXSEL_HPP_
