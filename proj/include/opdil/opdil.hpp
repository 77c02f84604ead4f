#pragma once

#include "opdil/error.hpp"
#include "opdil/core.hpp"
#include "opdil/moments.hpp"
#include "opdil/dilations.hpp"
#include "opdil/ca_class.hpp"
#include "opdil/io.hpp"
