#include "binlab/toy.hpp"

#include <algorithm>
#include <cmath>

#include "binlab/binarize.hpp"
#include "binlab/error.hpp"
#include "binlab/losses.hpp"
#include "binlab/rng.hpp"

namespace binlab {

namespace {

Tensor random_tensor(Rng& rng, const Shape& shape, double bound) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor random_binarized(Rng& rng, const Shape& shape, double alpha_max) {
  const double alpha = rng.uniform(0.0, alpha_max);
  Tensor t(shape);
  for (auto& v : t.data()) v = alpha * rng.sign();
  return t;
}

double joint_norm(const Tensor& a, const Tensor& b) {
  const double x = l2_norm(a);
  const double y = l2_norm(b);
  return std::sqrt(x * x + y * y);
}

double gradient_ratio(const ToyProblem& p, const Tensor& u1, const Tensor& u2, const Tensor& v1,
                      const Tensor& v2) {
  const double dist = joint_norm(subtract(u1, v1), subtract(u2, v2));
  if (dist == 0.0) return 0.0;
  Tensor gu1, gu2, gv1, gv2;
  p.loss_and_grad(u1, u2, gu1, gu2);
  p.loss_and_grad(v1, v2, gv1, gv2);
  return joint_norm(subtract(gu1, gv1), subtract(gu2, gv2)) / dist;
}

// Largest Hessian eigenvalue magnitude at (w1, w2) by power iteration on
// finite-difference Hessian-vector products.
double hessian_norm(const ToyProblem& p, const Tensor& w1, const Tensor& w2, Rng& rng,
                    int iterations = 30) {
  constexpr double h = 1e-6;
  Tensor v1 = random_tensor(rng, w1.shape(), 1.0);
  Tensor v2 = random_tensor(rng, w2.shape(), 1.0);
  Tensor g1, g2;
  p.loss_and_grad(w1, w2, g1, g2);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double n = joint_norm(v1, v2);
    if (n == 0.0) break;
    v1 = scale(v1, 1.0 / n);
    v2 = scale(v2, 1.0 / n);
    Tensor h1, h2;
    p.loss_and_grad(add(w1, scale(v1, h)), add(w2, scale(v2, h)), h1, h2);
    v1 = scale(subtract(h1, g1), 1.0 / h);
    v2 = scale(subtract(h2, g2), 1.0 / h);
    lambda = joint_norm(v1, v2);
  }
  return lambda;
}

}  // namespace

ToyProblem ToyProblem::make(std::uint64_t seed, std::size_t points, std::size_t inputs,
                            std::size_t hidden, std::size_t classes) {
  if (points == 0 || inputs == 0 || hidden == 0 || classes < 2)
    throw ConfigError("toy problem needs points, inputs, hidden > 0 and classes >= 2");
  Rng rng(seed);
  ToyProblem p;
  p.hidden = hidden;
  p.classes = classes;
  p.x = Tensor({points, inputs});
  for (auto& v : p.x.data()) v = rng.normal();
  const Tensor t1 = random_tensor(rng, {inputs, hidden}, 1.0);
  const Tensor t2 = random_tensor(rng, {hidden, classes}, 1.0);
  Tensor h = matmul(p.x, t1);
  for (auto& v : h.data()) v = std::tanh(v);
  p.labels = argmax_rows(matmul(h, t2));
  return p;
}

double ToyProblem::loss(const Tensor& w1, const Tensor& w2) const {
  Tensor h = matmul(x, w1);
  for (auto& v : h.data()) v = std::tanh(v);
  return l2svm_loss(matmul(h, w2), labels).loss;
}

double ToyProblem::loss_and_grad(const Tensor& w1, const Tensor& w2, Tensor& g1,
                                 Tensor& g2) const {
  Tensor h = matmul(x, w1);
  for (auto& v : h.data()) v = std::tanh(v);
  LossResult r = l2svm_loss(matmul(h, w2), labels);
  g2 = matmul_tn(h, r.grad);
  Tensor dh = matmul_nt(r.grad, w2);
  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= 1.0 - h[i] * h[i];
  g1 = matmul_tn(x, dh);
  return r.loss;
}

double estimate_beta(const ToyProblem& problem, std::uint64_t seed, double alpha_max,
                     std::size_t samples) {
  if (!(alpha_max > 0)) throw DomainError("estimate_beta: alpha_max must be positive");
  Rng rng(seed);
  double beta = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Tensor u1 = random_binarized(rng, problem.w1_shape(), alpha_max);
    const Tensor u2 = random_binarized(rng, problem.w2_shape(), alpha_max);
    const Tensor v1 = random_binarized(rng, problem.w1_shape(), alpha_max);
    const Tensor v2 = random_binarized(rng, problem.w2_shape(), alpha_max);
    beta = std::max(beta, gradient_ratio(problem, u1, u2, v1, v2));
    beta = std::max(beta, hessian_norm(problem, u1, u2, rng));
  }
  return beta;
}

ToyRunResult run_toy_proximal_newton(const ToyProblem& problem, const ToyRunOptions& o) {
  if (o.iterations < 1) throw ConfigError("toy run needs at least one iteration");
  if (!(o.eta > 0) || !(o.margin > 1)) throw ConfigError("toy run needs eta > 0 and margin > 1");
  Rng rng(o.seed);
  const double s1 = std::sqrt(6.0 / static_cast<double>(problem.x.cols() + problem.hidden));
  const double s2 = std::sqrt(6.0 / static_cast<double>(problem.hidden + problem.classes));
  Tensor w1 = random_tensor(rng, problem.w1_shape(), s1);
  Tensor w2 = random_tensor(rng, problem.w2_shape(), s2);

  ToyRunResult r;
  r.beta_estimate = estimate_beta(problem, rng.next_u64(), 2.0 * std::max(s1, s2), o.beta_samples);
  r.d_floor = o.margin * r.beta_estimate;
  r.min_curvature = std::numeric_limits<double>::infinity();

  Tensor d1(w1.shape(), r.d_floor);
  Tensor d2(w2.shape(), r.d_floor);
  Tensor q1 = binarize_lab(w1, d1).dense();
  Tensor q2 = binarize_lab(w2, d2).dense();
  AdamState a1;
  AdamState a2;
  a1.config = a2.config = o.adam;

  auto floored = [&](const Tensor& v_hat) {
    Tensor d = curvature(v_hat, o.eta, o.adam.epsilon);
    for (auto& x : d.data()) x = std::max(x, r.d_floor);
    return d;
  };

  Tensor g1, g2;
  double loss = problem.loss_and_grad(q1, q2, g1, g2);
  r.losses.push_back(loss);
  for (int t = 0; t < o.iterations; ++t) {
    d1 = floored(adam_step_moments(a1, g1).v_hat);
    d2 = floored(adam_step_moments(a2, g2).v_hat);
    r.min_curvature = std::min({r.min_curvature, *std::min_element(d1.data().begin(), d1.data().end()),
                                *std::min_element(d2.data().begin(), d2.data().end())});
    const Tensor n1 = binarize_lab(subtract(q1, hadamard_div(g1, d1)), d1).dense();
    const Tensor n2 = binarize_lab(subtract(q2, hadamard_div(g2, d2)), d2).dense();
    r.path_beta = std::max(r.path_beta, gradient_ratio(problem, q1, q2, n1, n2));
    q1 = n1;
    q2 = n2;
    loss = problem.loss_and_grad(q1, q2, g1, g2);
    r.losses.push_back(loss);
  }
  r.report = convergence_monitor(r.losses, 10, 0.0, 1e-10, r.beta_estimate, r.min_curvature);
  return r;
}

}  // namespace binlab
