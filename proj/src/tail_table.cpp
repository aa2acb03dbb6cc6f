#include <algorithm>
#include <cmath>

#include "irf/kernels.hpp"

namespace irf::kernels {
namespace {

constexpr double kNodesPerUnit = 128.0;  // nodes per unit of log|y|
constexpr int kMinNodes = 17;

double slope(const std::vector<double>& v, std::size_t i) {
  const std::size_t n = v.size();
  if (n < 3) return v[1] - v[0];
  if (i == 0) return 0.5 * (-3.0 * v[0] + 4.0 * v[1] - v[2]);
  if (i == n - 1) return 0.5 * (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]);
  return 0.5 * (v[i + 1] - v[i - 1]);
}

std::vector<TailTable::Segment> layout(double lo, double hi, const std::vector<double>& kinks) {
  std::vector<double> cuts{lo};
  for (double k : kinks) {
    const double lk = std::log(k);
    if (lk > lo && lk < hi) cuts.push_back(lk);
  }
  cuts.push_back(hi);
  std::vector<TailTable::Segment> segs;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    TailTable::Segment seg;
    seg.lo = cuts[s];
    seg.hi = cuts[s + 1];
    const double len = seg.hi - seg.lo;
    const auto n = len > 1e-12 ? std::max<std::size_t>(kMinNodes, static_cast<std::size_t>(std::ceil(kNodesPerUnit * len)) + 1)
                               : std::size_t{1};
    seg.step = n > 1 ? len / static_cast<double>(n - 1) : 0.0;
    seg.v.resize(n);
    segs.push_back(std::move(seg));
  }
  return segs;
}

}  // namespace

TailTable::TailTable(const ConditionalTail& h, double y_min_pos, double y_max_pos, double y_min_neg,
                     double y_max_neg, int workers)
    : h_(h), tabulated_(h.needs_table()), at_zero_(h(0.0)) {
  if (!tabulated_) return;
  if (y_min_pos > 0 && y_min_pos <= y_max_pos) pos_ = layout(std::log(y_min_pos), std::log(y_max_pos), h.kinks(true));
  if (y_min_neg > 0 && y_min_neg <= y_max_neg) neg_ = layout(std::log(y_min_neg), std::log(y_max_neg), h.kinks(false));

  struct Task {
    Segment* seg;
    std::size_t k;
    double sign;
  };
  std::vector<Task> tasks;
  for (auto* side : {&pos_, &neg_})
    for (Segment& s : *side)
      for (std::size_t k = 0; k < s.v.size(); ++k) tasks.push_back({&s, k, side == &pos_ ? 1.0 : -1.0});
  const auto nt = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < nt; ++i) {
    const Task& task = tasks[i];
    const double ly = task.k + 1 == task.seg->v.size() ? task.seg->hi : task.seg->lo + task.k * task.seg->step;
    task.seg->v[task.k] = h_(task.sign * std::exp(ly));
  }
  for (auto* side : {&pos_, &neg_}) {
    for (Segment& s : *side) {
      s.log_scale = std::all_of(s.v.begin(), s.v.end(), [](double x) { return x > 0; });
      if (s.log_scale)
        for (double& x : s.v) x = std::log(x);
    }
  }
}

double TailTable::eval(const std::vector<Segment>& segs, double ly) const noexcept {
  if (segs.empty()) return NAN;
  const double tol = 1e-12 * (1.0 + std::abs(ly));
  if (ly < segs.front().lo - tol || ly > segs.back().hi + tol) return NAN;
  const Segment* seg = &segs.back();
  for (const Segment& s : segs) {
    if (ly <= s.hi) {
      seg = &s;
      break;
    }
  }
  const std::vector<double>& v = seg->v;
  double r;
  if (v.size() == 1) {
    r = v[0];
  } else {
    const double x = std::clamp((ly - seg->lo) / seg->step, 0.0, static_cast<double>(v.size() - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(x), v.size() - 2);
    const double f = x - static_cast<double>(i);
    const double f2 = f * f, f3 = f2 * f;
    r = (2 * f3 - 3 * f2 + 1) * v[i] + (f3 - 2 * f2 + f) * slope(v, i) + (-2 * f3 + 3 * f2) * v[i + 1] +
        (f3 - f2) * slope(v, i + 1);
  }
  return seg->log_scale ? std::min(1.0, std::exp(r)) : std::clamp(r, 0.0, 1.0);
}

double TailTable::at(double y, double log_abs_y) const {
  if (!tabulated_) return h_(y);
  if (y == 0) return at_zero_;
  const double v = eval(y > 0 ? pos_ : neg_, log_abs_y);
  return std::isnan(v) ? h_(y) : v;
}

double TailTable::operator()(double y) const { return at(y, std::log(std::abs(y))); }

}  // namespace irf::kernels
