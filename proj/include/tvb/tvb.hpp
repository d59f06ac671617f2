#pragma once
// Umbrella header for the whole library.

#include "core.hpp"
#include "embed.hpp"
#include "generators.hpp"
#include "io.hpp"
#include "matching.hpp"
#include "oracle.hpp"
#include "partition.hpp"
#include "regularity.hpp"
#include "templates.hpp"
#include "util.hpp"
