#pragma once

#include <string>
#include <type_traits>
#include <utility>
#include <variant>

namespace xlayer {

// ---- capacity as a function of SINR ----

struct HighSinrLog {
  double K = 1e5;
  double scale = 1.0;
};

struct MQam {
  double K = 1e5;
  double symbol_rate = 1.0;
  double target_error = 1e-5;  // symbol error probability target
};

struct PreciseLog {
  double K = 1e5;
};

// Extrema of capacity-derivative products over an SINR interval.
struct ProductExtrema {
  double max_c1sq_x2 = 0;       // max C'(x)^2 x^2
  double min_c2_x2 = 0;         // min C''(x) x^2
  double max_c1sq_x2_1px2 = 0;  // max C'(x)^2 x^2 (1+x)^2
  double min_c2_x2_1px2 = 0;    // min C''(x) x^2 (1+x)^2
};

class CapacityFn {
 public:
  using Variant = std::variant<HighSinrLog, MQam, PreciseLog>;

  CapacityFn() : v_(HighSinrLog{}) {}
  CapacityFn(Variant v);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::is_constructible_v<Variant, T> && (!std::is_same_v<std::decay_t<T>, Variant>)
  CapacityFn(T v) : CapacityFn(Variant(std::move(v))) {}  // NOLINT(google-explicit-constructor)

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double inverse(double c) const;  // SINR achieving capacity c

  // Closed form; every supported variant has products monotone in x.
  ProductExtrema extrema(double lo, double hi) const;

  double K() const;
  // True when C(e^s) is concave in the log-power s (required by power control).
  bool log_concave_power() const { return !std::holds_alternative<PreciseLog>(v_); }
  std::string name() const;
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
  double mqam_offset_ = 0;  // ln(2 q^2) with q = Q^-1(target_error)
};

// ---- link cost D(C, F) ----

struct MM1Packets {
  double epsilon = 1e-9;
};

struct MM1Delay {};

struct CostPartials {
  double value = 0;
  double dF = 0;
  double dC = 0;
  double dFF = 0;
  double dCC = 0;
  double dCF = 0;
};

class LinkCostFn {
 public:
  using Variant = std::variant<MM1Packets, MM1Delay>;

  LinkCostFn() : v_(MM1Packets{}) {}
  LinkCostFn(Variant v);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::is_constructible_v<Variant, T> && (!std::is_same_v<std::decay_t<T>, Variant>)
  LinkCostFn(T v) : LinkCostFn(Variant(std::move(v))) {}  // NOLINT(google-explicit-constructor)

  // +inf when F >= C.
  double value(double C, double F) const;
  double dF(double C, double F) const;
  double dC(double C, double F) const;
  CostPartials partials(double C, double F) const;

  std::string name() const;
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

// ---- session utility U(r) and the loss B(F) = U(rbar) - U(rbar - F) ----

struct LogUtility {
  double weight = 1.0;
  double epsilon = 0.0;
};

// U(r) = a r - b r^2 / 2, increasing on [0, rbar] when a >= b rbar.
struct QuadCapUtility {
  double slope = 1.0;
  double curvature = 0.1;
};

class UtilityFn {
 public:
  using Variant = std::variant<LogUtility, QuadCapUtility>;

  UtilityFn() : v_(LogUtility{}) {}
  UtilityFn(Variant v);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires std::is_constructible_v<Variant, T> && (!std::is_same_v<std::decay_t<T>, Variant>)
  UtilityFn(T v) : UtilityFn(Variant(std::move(v))) {}  // NOLINT(google-explicit-constructor)

  double U(double r) const;
  double dU(double r) const;
  double d2U(double r) const;

  double loss(double F, double rbar) const { return U(rbar) - U(rbar - F); }
  double loss_d1(double F, double rbar) const { return dU(rbar - F); }
  double loss_d2(double F, double rbar) const { return -d2U(rbar - F); }

  // max B''(F) over F in [0, rbar] with B(F) <= budget.
  double max_loss_curvature(double rbar, double budget) const;

  std::string name() const;
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

}  // namespace xlayer
