#include "gmrk/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gmrk/detail/integrator_matrices.hpp"

namespace gmrk {

namespace {

// The filter propagates covariances that span many orders of magnitude at
// large anchors; running the recursions in extended precision keeps the
// smoothed step-scale marginals accurate while the interface stays double.
using Scalar = long double;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vc = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct TimelineNode {
  double t = 0.0;
  std::vector<std::pair<int, double>> updates;  // (component, value)
  bool is_query = false;
};

}  // namespace

Eigen::MatrixXd IntegratorSSM::F() const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(q + 1, q + 1);
  for (int i = 0; i < q; ++i) f(i, i + 1) = 1.0;
  return f;
}

Eigen::VectorXd IntegratorSSM::L() const {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(q + 1);
  l[q] = 1.0;
  return l;
}

IntegratorSSM make_integrator_ssm(int q, double sigma2) {
  if (q < 0 || q > 3) throw DomainError("IntegratorSSM: q must be in 0..3");
  if (!(sigma2 > 0.0)) throw DomainError("IntegratorSSM: sigma2 must be positive");
  return {q, sigma2};
}

Discretization discretize(const IntegratorSSM& ssm, double h) {
  if (!(h > 0.0)) throw DomainError("discretize: h must be positive");
  Discretization d;
  d.A = detail::transition<double>(ssm.q, h);
  d.Q = ssm.sigma2 * detail::process_noise<double>(ssm.q, h);
  return d;
}

std::vector<FilterPoint> filter(const IntegratorSSM& ssm, double t_value, double x_value,
                                const std::vector<double>& deriv_times,
                                const std::vector<double>& deriv_values,
                                const std::vector<double>& query_grid) {
  if (deriv_times.size() != deriv_values.size()) {
    throw DomainError("filter: derivative times/values length mismatch");
  }
  if (!deriv_times.empty() && ssm.q < 1) {
    throw DomainError("filter: derivative observations need q >= 1");
  }
  if (!(t_value > 0.0)) throw DomainError("filter: observation times must be positive");
  if (!std::is_sorted(deriv_times.begin(), deriv_times.end()) ||
      !std::is_sorted(query_grid.begin(), query_grid.end())) {
    throw DomainError("filter: observation and query times must be sorted");
  }

  std::map<double, TimelineNode> nodes;
  nodes[t_value].t = t_value;
  nodes[t_value].updates.emplace_back(0, x_value);
  for (size_t i = 0; i < deriv_times.size(); ++i) {
    if (!(deriv_times[i] > 0.0)) throw DomainError("filter: observation times must be positive");
    auto& node = nodes[deriv_times[i]];
    node.t = deriv_times[i];
    node.updates.emplace_back(1, deriv_values[i]);
  }
  for (double t : query_grid) {
    if (!(t > 0.0)) throw DomainError("filter: query times must be positive");
    auto& node = nodes[t];
    node.t = t;
    node.is_query = true;
  }

  const int n = ssm.q + 1;
  const Mat eye = Mat::Identity(n, n);

  struct Record {
    double t;
    Mat a;       // transition from the previous node
    Vc m_pred;
    Mat p_pred;
    Vc m_filt;
    Mat p_filt;
  };
  std::vector<Record> recs;
  recs.reserve(nodes.size());

  Vc m = Vc::Zero(n);
  Mat p = Mat::Zero(n, n);  // exact zero state at the process origin
  double t_prev = 0.0;
  for (auto& [t, node] : nodes) {
    const Scalar dt = static_cast<Scalar>(t - t_prev);
    Record r;
    r.t = t;
    r.a = detail::transition<Scalar>(ssm.q, dt);
    r.m_pred = r.a * m;
    r.p_pred = r.a * p * r.a.transpose() +
               static_cast<Scalar>(ssm.sigma2) * detail::process_noise<Scalar>(ssm.q, dt);
    m = r.m_pred;
    p = r.p_pred;
    for (const auto& [comp, value] : node.updates) {
      const Scalar s = p(comp, comp);
      if (!(s > Scalar(0)) || !std::isfinite(static_cast<double>(s))) {
        throw NumericError("filter: degenerate innovation variance");
      }
      Vc gain = p.col(comp) / s;
      m += gain * (static_cast<Scalar>(value) - m[comp]);
      Mat ikh = eye - gain * eye.row(comp);
      // Joseph form keeps the covariance symmetric under exact observations.
      p = ikh * p * ikh.transpose();
      p = ((p + p.transpose()) / Scalar(2)).eval();
    }
    if (!m.allFinite() || !p.allFinite()) throw NumericError("filter: covariance diverged");
    r.m_filt = m;
    r.p_filt = p;
    recs.push_back(std::move(r));
    t_prev = t;
  }

  // Rauch-Tung-Striebel backward pass.
  std::vector<Vc> ms(recs.size());
  std::vector<Mat> ps(recs.size());
  ms.back() = recs.back().m_filt;
  ps.back() = recs.back().p_filt;
  for (int i = static_cast<int>(recs.size()) - 2; i >= 0; --i) {
    const Record& nxt = recs[static_cast<size_t>(i) + 1];
    const Record& cur = recs[static_cast<size_t>(i)];
    Mat g = nxt.p_pred.ldlt().solve(nxt.a * cur.p_filt).transpose();
    ms[static_cast<size_t>(i)] = cur.m_filt + g * (ms[static_cast<size_t>(i) + 1] - nxt.m_pred);
    ps[static_cast<size_t>(i)] =
        cur.p_filt + g * (ps[static_cast<size_t>(i) + 1] - nxt.p_pred) * g.transpose();
    if (!ms[static_cast<size_t>(i)].allFinite()) throw NumericError("filter: smoother diverged");
  }

  std::vector<FilterPoint> out;
  out.reserve(query_grid.size());
  size_t ri = 0;
  for (double t : query_grid) {
    while (ri < recs.size() && recs[ri].t < t) ++ri;
    // query times were inserted into the timeline, so recs[ri].t == t
    out.push_back({t, static_cast<double>(ms[ri][0]), static_cast<double>(ps[ri](0, 0))});
  }
  return out;
}

}  // namespace gmrk
