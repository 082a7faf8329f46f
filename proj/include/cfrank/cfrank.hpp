#pragma once

#include "angles.hpp"
#include "bigint.hpp"
#include "builder_wellapprox.hpp"
#include "builders.hpp"
#include "builders_infinite.hpp"
#include "cli.hpp"
#include "contfrac.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "json_io.hpp"
#include "params.hpp"
#include "quantities.hpp"
#include "simulator.hpp"
#include "trace.hpp"
#include "verifier.hpp"
