#pragma once

// Generated by tests/oracles/scalar_reference.py (mpmath, 30 digits).
// Scalar benchmark a = 0.9, b = c = q = r = 1, variances 1 and 0.

namespace oracle::frozen {

inline constexpr double kZeroStateVar = 5.2631578947368421;
inline constexpr double kZeroCostToGo = 5.2631578947368421;
inline constexpr double kZeroCost = 2.6315789473684211;
inline constexpr double kZeroGain = -0.75630252100840336;
inline constexpr double kZeroN = 3.5824856258292791;
inline constexpr double kZeroLambda = 18.855187504364627;
inline constexpr double kFirstCriticalBeta = 0.053035802469135802;

// beta = 0.06
inline constexpr double kB006Beta = 0.06;
inline constexpr double kB006D = 0.013592170254450795;
inline constexpr double kB006StateVar = 4.9824140903984746;
inline constexpr double kB006S = 5.0205596666278463;
inline constexpr double kB006L = -0.75051223643065468;
inline constexpr double kB006N = 3.3911923171809663;
inline constexpr double kB006M = 0.046093663340709197;
inline constexpr double kB006Lam = 16.8963243843735;
inline constexpr double kB006Info = 0.0068426947326302642;
inline constexpr double kB006Cost = 2.5102798333139232;

// beta = 0.1
inline constexpr double kB01Beta = 0.1;
inline constexpr double kB01D = 0.077457090727099779;
inline constexpr double kB01StateVar = 3.9939153760559216;
inline constexpr double kB01S = 4.1567324721531198;
inline constexpr double kB01L = -0.7254708762069602;
inline constexpr double kB01N = 2.7140295138577628;
inline constexpr double kB01M = 0.21022083029090724;
inline constexpr double kB01Lam = 10.839604206466097;
inline constexpr double kB01Info = 0.040310695016118893;
inline constexpr double kB01Cost = 2.0783662360765599;

// beta = 1
inline constexpr double kB1Beta = 1.0;
inline constexpr double kB1D = 0.51479380614631304;
inline constexpr double kB1StateVar = 1.7731201634351286;
inline constexpr double kB1S = 2.1138493804324383;
inline constexpr double kB1L = -0.61096867894264951;
inline constexpr double kB1N = 1.1623461871018905;
inline constexpr double kB1M = 0.59836861771783672;
inline constexpr double kB1Lam = 2.0609794612423026;
inline constexpr double kB1Info = 0.36159066821276437;
inline constexpr double kB1Cost = 1.0569246902162192;

// beta = 10
inline constexpr double kB10Beta = 10.0;
inline constexpr double kB10D = 0.89670950745452349;
inline constexpr double kB10StateVar = 1.2393087514964714;
inline constexpr double kB10S = 1.5762837855427359;
inline constexpr double kB10L = -0.55065960316541742;
inline constexpr double kB10N = 0.78119622344074038;
inline constexpr double kB10M = 0.70050608074688019;
inline constexpr double kB10Lam = 0.96814331634610248;
inline constexpr double kB10Info = 1.1351049722030573;
inline constexpr double kB10Cost = 0.78814189277136793;

// classic full-information limit
inline constexpr double kLqrCostToGo = 1.4838999026786498;
inline constexpr double kLqrGain = -0.53766655853183311;
inline constexpr double kLqrStateVar = 1.1511262057359176;
inline constexpr double kLqrCost = 0.7419499513393249;

}  // namespace oracle::frozen
