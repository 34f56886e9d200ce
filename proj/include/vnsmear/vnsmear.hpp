#ifndef VNSMEAR_VNSMEAR_HPP
#define VNSMEAR_VNSMEAR_HPP

#include <vnsmear/grid.hpp>
#include <vnsmear/qstate.hpp>
#include <vnsmear/measure.hpp>
#include <vnsmear/smear.hpp>
#include <vnsmear/classical.hpp>
#include <vnsmear/io.hpp>

#endif  // VNSMEAR_VNSMEAR_HPP
