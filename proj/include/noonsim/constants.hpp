#ifndef NOONSIM_CONSTANTS_HPP
#define NOONSIM_CONSTANTS_HPP

#include <numbers>

namespace noonsim {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Gyromagnetic ratios in rad s^-1 T^-1.
namespace gamma {
inline constexpr double hydrogen = two_pi * 42.577478518e6;
inline constexpr double fluorine = two_pi * 40.052e6;
inline constexpr double phosphorus = two_pi * 17.235e6;
}  // namespace gamma

}  // namespace noonsim

#endif
