#pragma once
// All embedding procedures.

#include "embed/absorber.hpp"
#include "embed/approx.hpp"
#include "embed/blowup.hpp"
#include "embed/equitable.hpp"
#include "embed/params.hpp"
#include "embed/partial.hpp"
#include "embed/prescribed.hpp"
#include "embed/quasi.hpp"
#include "embed/transversal.hpp"
