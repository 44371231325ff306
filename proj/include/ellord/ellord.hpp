#pragma once

#include "ellord/cones.hpp"
#include "ellord/distribution.hpp"
#include "ellord/error.hpp"
#include "ellord/generator.hpp"
#include "ellord/io.hpp"
#include "ellord/orders.hpp"
#include "ellord/random.hpp"
#include "ellord/sampler.hpp"
#include "ellord/special.hpp"
#include "ellord/testfn.hpp"
#include "ellord/verifier.hpp"
