#pragma once

#include <cstdint>
#include <random>

namespace divopt {

// One generator per run; every stochastic operation takes it by reference.
using Rng = std::mt19937_64;

}  // namespace divopt
