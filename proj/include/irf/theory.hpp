#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "irf/dist.hpp"
#include "irf/maps.hpp"

namespace irf {

enum class Regime { GreyBHeavy, KeveiAHeavy, IndepComparable, AffineGeneral, IfsSigned, ExampleD1, ExampleD2 };

std::string_view regime_name(Regime r) noexcept;

struct Prediction {
  Regime regime = Regime::AffineGeneral;
  double constant = 0.0;
  std::vector<std::pair<std::string, double>> inputs;
  // The tail the ratio is normalized by, e.g. "P[A>t]".
  std::string reference = "P[A>t]";
};

std::string inputs_json(const Prediction& p);
// CSV row `regime,constant,reference,inputs_json` (no header).
std::string prediction_csv_row(const Prediction& p);
inline constexpr const char* kPredictionCsvHeader = "regime,constant,reference,inputs_json";

// P[X > t] ~ P[B > t] / (1 - E[A^alpha]).
double grey_constant(double ea_alpha);
// P[X > t] ~ E[X^alpha] / (1 - E[A^alpha]) P[A > t].
double kevei_constant(double ex_alpha, double ea_alpha);
// P[X > t] ~ xi / (1 - mu) P[A > t]; also the left tail with xi_minus.
double affine_constant(double xi, double mu);
// (E[X_+^alpha] + c_B) / (1 - E[A^alpha]).
double indep_constant(double ex_plus_alpha, double c_b, double ea_alpha);

struct IfsConstants {
  double d_plus = 0.0;
  double d_minus = 0.0;
  // Same constants from solving the 2x2 system directly.
  double d_plus_system = 0.0;
  double d_minus_system = 0.0;
};

// Closed form plus linear solve of D+ = mu+ D+ + mu- D- + xi+, D- = mu+ D- + mu- D+ + xi-.
// Throws AssertionFailure if the two disagree beyond 1e-12 relative.
IfsConstants ifs_constants(double mu_plus, double mu_minus, double xi_plus, double xi_minus);

// Gaussian elimination with partial pivoting on a 2x2 system; used as the independent route.
std::pair<double, double> solve_2x2(double a11, double a12, double a21, double a22, double b1, double b2);

struct ExampleConstants {
  double d1 = 0.0;
  double d2 = 0.0;
  // False only when 2 mu^3 - mu + 1 = 2 mu + sigma (1 - mu).
  bool distinct = true;
};

// d1 = (2 mu^3 - mu + 1) / ((1 - mu)(1 - sigma)^2), d2 = (2 mu + sigma (1 - mu)) / ((1 - mu)(1 - sigma)^2).
ExampleConstants example_constants(double mu, double sigma);

// Constant for X = A X + A with alpha = 2 from the moment identities of Y = X + 1:
// (1 + mu) / ((1 - mu)(1 - sigma)^2).
double equal_input_constant(double mu, double sigma);

// First two moments of X = A X + B for alpha = 2 style checks:
// E X = E B / (1 - E A), E X^2 = (E B^2 + 2 E[AB] E X) / (1 - E A^2).
struct AffineMoments {
  double ex = 0.0;
  double ex2 = 0.0;
};
AffineMoments affine_moments(double ea, double ea2, double eb, double eb2, double eab);

// ---- S(alpha) membership predicates ---------------------------------------------------------

struct Clause {
  std::string name;
  bool pass = false;
  bool conclusive = true;
  std::string detail;
};

struct PredicateReport {
  std::vector<Clause> clauses;
  std::vector<std::string> info;
  bool pass() const;
  const Clause& clause(std::string_view name) const;
};

// log K(x) on the log scale, K(x) = e^{alpha x} S(x).
using LogK = std::function<double(double)>;

LogK log_k_of(const LogTail& tail, double alpha);

struct GridSpec {
  double x_lo = 1e2;
  double x_hi = 1e6;
  int per_decade = 40;
};

// (i) K(x - y)/K(x) -> 1 for y in {1, 2}; (ii) K(2x)/K(x) bounded away from 0; (iii) int K < inf.
PredicateReport salpha_check_dom(const LogK& log_k, double alpha, const GridSpec& grid = {});

// Eventual concavity of -log K, f(x) = log^{1/gamma} x <= x/2 with f -> inf,
// sup_{y <= f(x)} |K(x - y)/K(x) - 1| -> 0, and x K(f(x)) -> 0.
PredicateReport salpha_check_convex(const LogK& log_k, double alpha, double gamma, const GridSpec& grid = {});

// Same clauses with a caller-supplied f.
PredicateReport salpha_check_convex_with(const LogK& log_k, const std::function<double(double)>& f,
                                         const GridSpec& grid = {});

// ---- convolution diagnostics ----------------------------------------------------------------

struct Trajectory {
  std::vector<double> t;
  std::vector<double> estimate;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  double target = 0.0;
  bool final_within = false;
  // |estimate - target| non-increasing over the final three points.
  bool monotone_approach = false;
  bool pass() const { return final_within && monotone_approach; }
};

bool approach_non_increasing(const std::vector<double>& est, double target, std::size_t last_n = 3);

// Stieltjes integral int g dF over [a, b] on a uniform grid with trapezoidal weights, where F is
// given by its survival S.
double stieltjes(const std::function<double(double)>& g, const std::function<double(double)>& survival, double a,
                 double b, double h);

// (G1 * G2)-bar(t) / F-bar(t) along t_list vs k1 m_alpha(G2) + k2 m_alpha(G1); the grid step is
// halved until the last value changes by < 0.1%.
Trajectory convolution_limit_check(const LogTail& g1, const LogTail& g2, const LogTail& f, double k1, double k2,
                                   double alpha, const std::vector<double>& t_list, double tolerance = 0.05,
                                   double h0 = 1e-2);

double convolution_tail(const LogTail& g1, const LogTail& g2, double t, double h);

struct SmallIntReport {
  std::vector<double> v;
  std::vector<double> x;
  // values[i][j] = I(v_i, x_j)
  std::vector<std::vector<double>> values;
  bool stabilizes = false;  // last two x within 5% for every v
  bool v_monotone = false;  // stabilized values non-increasing in v
  bool pass() const { return stabilizes && v_monotone; }
};

// I(v, x) = int_v^{x - v} F-bar(x - y) / F-bar(x) dF(y).
double smallint(const LogTail& f, double v, double x);
SmallIntReport appendix_smallint_diagnostic(const LogTail& f, double alpha, const std::vector<double>& v_list,
                                            const std::vector<double>& x_list);

struct ProductReport {
  Trajectory traj;
  bool target_finite = true;
  std::string note;
};

// Monte Carlo P[A A' > t] / S_A(t) with the split estimator 2 E[S(t/A'); A' <= sqrt t] + S(sqrt t)^2,
// target 2 E[A^alpha]. Common random numbers across t.
ProductReport product_convolution_check(const TailModel& a, double alpha, const std::vector<double>& t_list,
                                        std::size_t n_mc, std::uint64_t seed, double tolerance = 0.25,
                                        int workers = 1);

struct UniformityReport {
  std::vector<double> t;
  std::vector<double> deviation;
  bool strictly_decreasing = false;
  bool final_below = false;  // last deviation < 1e-2
};

// sup over a geometric y grid on (c, 1e3] of |S(yt)/S(t) - y^-alpha| at each t.
UniformityReport rv_uniformity_check(const TailModel& a, double alpha, double c, const std::vector<double>& t_list,
                                     int y_points = 2000);

}  // namespace irf
