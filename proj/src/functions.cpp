#include "xlayer/functions.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "xlayer/error.hpp"

namespace xlayer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace

// ---------------------------------------------------------------- capacity

CapacityFn::CapacityFn(Variant v) : v_(v) {
  std::visit(overloaded{
                 [](const HighSinrLog& c) { require(c.K > 0 && c.scale > 0, "HighSinrLog needs K, scale > 0"); },
                 [this](const MQam& c) {
                   require(c.K > 0 && c.symbol_rate > 0, "MQam needs K, symbol rate > 0");
                   require(c.target_error > 0 && c.target_error < 0.5, "MQam error target must lie in (0, 0.5)");
                   // Q^-1(p) = sqrt(2) erfc^-1(2p)
                   const double q = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * c.target_error);
                   mqam_offset_ = std::log(2.0 * q * q);
                 },
                 [](const PreciseLog& c) { require(c.K > 0, "PreciseLog needs K > 0"); },
             },
             v_);
}

double CapacityFn::value(double x) const {
  return std::visit(overloaded{
                        [x](const HighSinrLog& c) { return c.scale * std::log(c.K * x); },
                        [x, this](const MQam& c) { return c.symbol_rate * (std::log(c.K * x) - mqam_offset_); },
                        [x](const PreciseLog& c) { return std::log1p(c.K * x); },
                    },
                    v_);
}

double CapacityFn::d1(double x) const {
  return std::visit(overloaded{
                        [x](const HighSinrLog& c) { return c.scale / x; },
                        [x](const MQam& c) { return c.symbol_rate / x; },
                        [x](const PreciseLog& c) { return c.K / (1.0 + c.K * x); },
                    },
                    v_);
}

double CapacityFn::d2(double x) const {
  return std::visit(overloaded{
                        [x](const HighSinrLog& c) { return -c.scale / (x * x); },
                        [x](const MQam& c) { return -c.symbol_rate / (x * x); },
                        [x](const PreciseLog& c) {
                          const double u = 1.0 + c.K * x;
                          return -c.K * c.K / (u * u);
                        },
                    },
                    v_);
}

double CapacityFn::inverse(double cap) const {
  return std::visit(overloaded{
                        [cap](const HighSinrLog& c) { return std::exp(cap / c.scale) / c.K; },
                        [cap, this](const MQam& c) { return std::exp(cap / c.symbol_rate + mqam_offset_) / c.K; },
                        [cap](const PreciseLog& c) { return std::expm1(cap) / c.K; },
                    },
                    v_);
}

ProductExtrema CapacityFn::extrema(double lo, double hi) const {
  require(lo >= 0 && hi >= lo, "extrema interval must satisfy 0 <= lo <= hi");
  const double w = (1.0 + hi) * (1.0 + hi);
  // C'x is constant (s) for the log-SINR forms and Kx/(1+Kx), increasing, for the
  // precise form; every product is then extremal at the right end.
  double s = 0;  // C'(hi) hi
  double c2 = 0;  // C''(hi) hi^2
  std::visit(overloaded{
                 [&](const HighSinrLog& c) { s = c.scale, c2 = -c.scale; },
                 [&](const MQam& c) { s = c.symbol_rate, c2 = -c.symbol_rate; },
                 [&](const PreciseLog& c) {
                   s = c.K * hi / (1.0 + c.K * hi);
                   c2 = -s * s;
                 },
             },
             v_);
  return {s * s, c2, s * s * w, c2 * w};
}

double CapacityFn::K() const {
  return std::visit([](const auto& c) { return c.K; }, v_);
}

std::string CapacityFn::name() const {
  return std::visit(overloaded{
                        [](const HighSinrLog&) { return std::string("high_sinr_log"); },
                        [](const MQam&) { return std::string("mqam"); },
                        [](const PreciseLog&) { return std::string("precise_log"); },
                    },
                    v_);
}

// ---------------------------------------------------------------- link cost

LinkCostFn::LinkCostFn(Variant v) : v_(v) {
  if (auto* p = std::get_if<MM1Packets>(&v_)) require(p->epsilon >= 0, "MM1Packets epsilon must be >= 0");
}

double LinkCostFn::value(double C, double F) const {
  if (F >= C) return kInf;
  return std::visit(overloaded{
                        [=](const MM1Packets& c) { return (F + c.epsilon) / (C - F); },
                        [=](const MM1Delay&) { return 1.0 / (C - F); },
                    },
                    v_);
}

double LinkCostFn::dF(double C, double F) const {
  if (F >= C) return kInf;
  const double u = C - F;
  return std::visit(overloaded{
                        [=](const MM1Packets& c) { return (C + c.epsilon) / (u * u); },
                        [=](const MM1Delay&) { return 1.0 / (u * u); },
                    },
                    v_);
}

double LinkCostFn::dC(double C, double F) const {
  if (F >= C) return -kInf;
  const double u = C - F;
  return std::visit(overloaded{
                        [=](const MM1Packets& c) { return -(F + c.epsilon) / (u * u); },
                        [=](const MM1Delay&) { return -1.0 / (u * u); },
                    },
                    v_);
}

CostPartials LinkCostFn::partials(double C, double F) const {
  if (F >= C) return {kInf, kInf, -kInf, kInf, kInf, -kInf};
  const double u = C - F;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return std::visit(overloaded{
                        [=](const MM1Packets& c) {
                          const double e = c.epsilon;
                          return CostPartials{(F + e) / u,         (C + e) / u2,
                                              -(F + e) / u2,       2.0 * (C + e) / u3,
                                              2.0 * (F + e) / u3, -(C + F + 2.0 * e) / u3};
                        },
                        [=](const MM1Delay&) {
                          return CostPartials{1.0 / u, 1.0 / u2, -1.0 / u2, 2.0 / u3, 2.0 / u3, -2.0 / u3};
                        },
                    },
                    v_);
}

std::string LinkCostFn::name() const {
  return std::holds_alternative<MM1Packets>(v_) ? "mm1_packets" : "mm1_delay";
}

// ---------------------------------------------------------------- utility

UtilityFn::UtilityFn(Variant v) : v_(v) {
  std::visit(overloaded{
                 [](const LogUtility& u) { require(u.weight > 0 && u.epsilon >= 0, "LogUtility needs weight > 0"); },
                 [](const QuadCapUtility& u) {
                   require(u.slope > 0 && u.curvature > 0, "QuadCapUtility needs slope, curvature > 0");
                 },
             },
             v_);
}

double UtilityFn::U(double r) const {
  return std::visit(overloaded{
                        [r](const LogUtility& u) { return u.weight * std::log(u.epsilon + r); },
                        [r](const QuadCapUtility& u) { return u.slope * r - 0.5 * u.curvature * r * r; },
                    },
                    v_);
}

double UtilityFn::dU(double r) const {
  return std::visit(overloaded{
                        [r](const LogUtility& u) { return u.weight / (u.epsilon + r); },
                        [r](const QuadCapUtility& u) { return u.slope - u.curvature * r; },
                    },
                    v_);
}

double UtilityFn::d2U(double r) const {
  return std::visit(overloaded{
                        [r](const LogUtility& u) { return -u.weight / ((u.epsilon + r) * (u.epsilon + r)); },
                        [](const QuadCapUtility& u) { return -u.curvature; },
                    },
                    v_);
}

double UtilityFn::max_loss_curvature(double rbar, double budget) const {
  return std::visit(overloaded{
                        [=](const LogUtility& u) {
                          // B'' = a/(eps + rbar - F)^2 grows with F; B <= budget keeps
                          // eps + rbar - F >= (eps + rbar) exp(-budget / a).
                          const double lo = std::max(u.epsilon, (u.epsilon + rbar) * std::exp(-budget / u.weight));
                          if (lo <= 0) return kInf;
                          return u.weight / (lo * lo);
                        },
                        [](const QuadCapUtility& u) { return u.curvature; },
                    },
                    v_);
}

std::string UtilityFn::name() const {
  return std::holds_alternative<LogUtility>(v_) ? "log" : "quad_cap";
}

}  // namespace xlayer
