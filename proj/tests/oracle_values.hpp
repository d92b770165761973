#pragma once

// Generated by tools/oracles/make_oracles.py; do not edit by hand.

namespace oracle {

inline constexpr double kRhoPowerLaw1d = 0.3535533905932737622;
inline constexpr double kFracConst1d15 = 0.29920671030107450845;
inline constexpr double kFracConst2d19 = 0.056798393484741501468;
inline constexpr double kRatio1d1999 = 0.24976935693894376778;
inline constexpr double kRatio2d1999 = 0.025302038476075151207;
inline constexpr double kJ1At03Alpha15 = 6.0697135032893281697;
inline constexpr double kJ3TailAlpha15 = 0.11156508007421491447;
inline constexpr double kJ1MomentAlpha19 = 1.8198496495038899298;
inline constexpr double kHatInner1dAlpha15 = 3.8350092317457897627;
inline constexpr double kHatCross1dAlpha15 = 0.10973605124498938959;
inline constexpr double kHatInner1dAlpha19 = 6.8029343027543724378;
inline constexpr double kHatCross1dAlpha19 = 0.026520663850632440515;
inline constexpr double kLinearInner2dAlpha19 = 0.44970428205321056489;
inline constexpr double kLinearInner2dAlpha15 = 0.31962439782918528613;
inline constexpr double kLegendre5Node0 = -0.906179845938664;
inline constexpr double kLegendre5Weight0 = 0.23692688505618897;
inline constexpr double kJacobi6Node0 = -0.9686331867851989;  // weight (1+x)^-0.5
inline constexpr double kJacobi6Weight0 = 0.7046942624290164;

}  // namespace oracle
