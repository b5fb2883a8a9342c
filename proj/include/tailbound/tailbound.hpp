#ifndef TAILBOUND_TAILBOUND_HPP
#define TAILBOUND_TAILBOUND_HPP

#include "tailbound/error.hpp"
#include "tailbound/moments.hpp"
#include "tailbound/special_functions.hpp"
#include "tailbound/mgf_bounds.hpp"
#include "tailbound/distributions.hpp"
#include "tailbound/hoeffding.hpp"
#include "tailbound/bennett.hpp"
#include "tailbound/oracle.hpp"
#include "tailbound/serialize.hpp"

#endif  // TAILBOUND_TAILBOUND_HPP
