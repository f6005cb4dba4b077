#pragma once

#include "nlac/closed_form.hpp"
#include "nlac/gaussian_fit.hpp"
#include "nlac/witness.hpp"
