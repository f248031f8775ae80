#ifndef MMEQD_MMEQD_HPP
#define MMEQD_MMEQD_HPP

#include "mmeqd/errors.hpp"
#include "mmeqd/numerics.hpp"
#include "mmeqd/rng.hpp"
#include "mmeqd/signal_model.hpp"
#include "mmeqd/distributions.hpp"
#include "mmeqd/block_detector.hpp"
#include "mmeqd/quickest.hpp"
#include "mmeqd/harness.hpp"
#include "mmeqd/version.hpp"

#endif // MMEQD_MMEQD_HPP
