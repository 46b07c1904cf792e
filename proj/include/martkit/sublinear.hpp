#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "generators.hpp"
#include "operators/fractional.hpp"
#include "operators/haar.hpp"
#include "operators/transform.hpp"
#include "operators/walsh.hpp"

namespace martkit {

// Operator on step functions of one tree. Inputs are read as terminal values of
// the martingales they generate.
class SublinearOp {
 public:
  SublinearOp(TreePtr tree, std::string name, double q) : tree_(std::move(tree)), name_(std::move(name)), q_(q) {}
  virtual ~SublinearOp() = default;

  const TreePtr& tree() const { return tree_; }
  const std::string& name() const { return name_; }
  double q() const { return q_; }
  virtual bool linear() const = 0;
  // T(g a) = g T(a) (|g| T(a) for nonnegative T) whenever g is F_{n-1}-measurable
  // and a has no differences before level n.
  virtual bool commutes_with_predictable() const { return true; }
  virtual bool nonnegative() const { return !linear(); }

  // x -> T(u - c(x) v)(x). Without v and c this is T(u).
  virtual StepFunction shifted(const StepFunction& u, const StepFunction* v, const StepFunction* c) const = 0;

  StepFunction apply(const StepFunction& f) const {
    check(f);
    return shifted(f, nullptr, nullptr);
  }

  void check(const StepFunction& f) const {
    if (!same_tree(f.tree(), tree_)) throw std::invalid_argument(name_ + ": function lives on another tree");
  }

 private:
  TreePtr tree_;
  std::string name_;
  double q_;
};

using OpPtr = std::shared_ptr<const SublinearOp>;

class LinearOp : public SublinearOp {
 public:
  using SublinearOp::SublinearOp;
  bool linear() const override { return true; }
  virtual StepFunction linear_apply(const StepFunction& f) const = 0;

  StepFunction shifted(const StepFunction& u, const StepFunction* v, const StepFunction* c) const override {
    auto tu = linear_apply(u);
    if (!v || !c) return tu;
    auto tv = linear_apply(*v);
    auto& out = tu.mutable_values();
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= (*c)[j] * tv[j];
    return tu;
  }
};

// T f(x) = combine_n |A_n f(x)| for linear pieces A_n stored on level-n cells.
class FamilyOp : public SublinearOp {
 public:
  enum class Combine { max, l2 };
  FamilyOp(TreePtr tree, std::string name, double q, Combine how) : SublinearOp(std::move(tree), std::move(name), q), how_(how) {}
  bool linear() const override { return false; }

  virtual std::vector<std::vector<double>> components(const StepFunction& f) const = 0;

  StepFunction shifted(const StepFunction& u, const StepFunction* v, const StepFunction* c) const override {
    const auto& tree = *this->tree();
    auto cu = components(u);
    std::vector<std::vector<double>> cv;
    if (v && c) cv = components(*v);
    std::vector<double> out(tree.leaves(), 0.0);
    for (std::size_t n = 0; n < cu.size(); ++n) {
      const std::size_t w = tree.leaves_per_cell(n);
      for (std::size_t j = 0; j < out.size(); ++j) {
        double val = cu[n][j / w];
        if (!cv.empty()) val -= (*c)[j] * cv[n][j / w];
        if (how_ == Combine::max)
          out[j] = std::max(out[j], std::abs(val));
        else
          out[j] += val * val;
      }
    }
    if (how_ == Combine::l2)
      for (double& x : out) x = std::sqrt(x);
    return StepFunction(this->tree(), std::move(out));
  }

 private:
  Combine how_;
};

class MaximalOp final : public FamilyOp {
 public:
  explicit MaximalOp(TreePtr tree) : FamilyOp(std::move(tree), "maximal", 1.0, Combine::max) {}
  std::vector<std::vector<double>> components(const StepFunction& f) const override {
    return Martingale::from_terminal(f).levels();
  }
};

class SquareOp final : public FamilyOp {
 public:
  explicit SquareOp(TreePtr tree) : FamilyOp(std::move(tree), "square", 1.0, Combine::l2) {}
  std::vector<std::vector<double>> components(const StepFunction& f) const override {
    auto m = Martingale::from_terminal(f);
    std::vector<std::vector<double>> d(m.depth() + 1);
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = m.difference(n);
    return d;
  }
};

class MaximalTransformOp final : public FamilyOp {
 public:
  explicit MaximalTransformOp(TransformSymbol eps)
      : FamilyOp(eps.tree(), "maximal-transform", 1.0, Combine::max), eps_(std::move(eps)) {}
  std::vector<std::vector<double>> components(const StepFunction& f) const override {
    return martingale_transform(eps_, Martingale::from_terminal(f)).levels();
  }

 private:
  TransformSymbol eps_;
};

class TransformOp final : public LinearOp {
 public:
  explicit TransformOp(TransformSymbol eps) : LinearOp(eps.tree(), "transform", 1.0), eps_(std::move(eps)) {}
  StepFunction linear_apply(const StepFunction& f) const override { return martingale_transform(eps_, f); }

 private:
  TransformSymbol eps_;
};

class FractionalOp final : public LinearOp {
 public:
  FractionalOp(TreePtr tree, double alpha)
      : LinearOp(std::move(tree), "fractional", fractional_exponent(alpha)), alpha_(alpha) {}
  StepFunction linear_apply(const StepFunction& f) const override { return fractional_integral(alpha_, f); }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

class HilbertOp final : public LinearOp {
 public:
  explicit HilbertOp(TreePtr tree, bool adjoint = false)
      : LinearOp(tree, adjoint ? "hilbert-adjoint" : "hilbert", 1.0), sys_(tree), adjoint_(adjoint) {}
  StepFunction linear_apply(const StepFunction& f) const override {
    return adjoint_ ? dyadic_hilbert_adjoint(sys_, f) : dyadic_hilbert(sys_, f);
  }
  bool commutes_with_predictable() const override { return !adjoint_; }

 private:
  HaarSystem sys_;
  bool adjoint_;
};

class ExpectationOp final : public LinearOp {
 public:
  ExpectationOp(TreePtr tree, std::size_t level) : LinearOp(std::move(tree), "expectation", 1.0), level_(level) {}
  StepFunction linear_apply(const StepFunction& f) const override { return conditional_expectation(f, level_); }

 private:
  std::size_t level_;
};

class IdentityOp final : public LinearOp {
 public:
  explicit IdentityOp(TreePtr tree) : LinearOp(std::move(tree), "identity", 1.0) {}
  StepFunction linear_apply(const StepFunction& f) const override { return f; }
};

class CesaroOp final : public SublinearOp {
 public:
  explicit CesaroOp(std::size_t depth) : CesaroOp(std::make_shared<const WalshContext>(depth)) {}
  explicit CesaroOp(std::shared_ptr<const WalshContext> ctx) : SublinearOp(ctx->tree(), "cesaro", 1.0), ctx_(std::move(ctx)) {}
  bool linear() const override { return false; }
  bool commutes_with_predictable() const override { return false; }
  StepFunction shifted(const StepFunction& u, const StepFunction* v, const StepFunction* c) const override {
    return cesaro_maximal_shifted(*ctx_, u, v, c);
  }
  const WalshContext& context() const { return *ctx_; }

 private:
  std::shared_ptr<const WalshContext> ctx_;
};

// Slow evaluation of T(u - c(x) v)(x) one leaf at a time.
inline StepFunction reference_shifted(const SublinearOp& T, const StepFunction& u, const StepFunction& v,
                                      const StepFunction& c) {
  std::vector<double> out(u.size());
  for (std::size_t x = 0; x < out.size(); ++x) {
    const double cx = c[x];
    auto w = u.zip(v, [cx](double a, double b) { return a - cx * b; });
    out[x] = T.apply(w)[x];
  }
  return StepFunction(u.tree(), std::move(out));
}

// Operator names understood by make_operator.
inline const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> names{"maximal",  "square",          "transform", "maximal-transform",
                                              "hilbert",  "hilbert-adjoint", "cesaro",    "fractional",
                                              "identity", "expectation"};
  return names;
}

// Default tree family for an operator: random binary trees for the martingale
// operators, the non-doubling measure for the Hilbert transform, Lebesgue
// dyadic for Walsh means and uniform branching 2, 3, ..., depth+1 for I_alpha.
inline TreePtr operator_tree(const std::string& name, std::size_t depth, Rng& rng) {
  if (name == "hilbert" || name == "hilbert-adjoint") return build_nondoubling_measure(depth);
  if (name == "cesaro") return build_uniform_dyadic(depth);
  if (name == "fractional") {
    std::vector<std::size_t> p;
    std::size_t leaves = 1;
    for (std::size_t k = 1; k <= depth; ++k) {
      p.push_back(k + 1);
      leaves *= k + 1;
    }
    return build_pk_filtration(p, UniformMeasure{}, std::max(leaves, kDefaultMaxLeaves));
  }
  return random_binary_tree(depth, rng);
}

inline OpPtr make_operator(const std::string& name, const TreePtr& tree, Rng& rng, double alpha = 0.5) {
  if (name == "maximal") return std::make_shared<MaximalOp>(tree);
  if (name == "square") return std::make_shared<SquareOp>(tree);
  if (name == "transform") return std::make_shared<TransformOp>(TransformSymbol::random(tree, rng));
  if (name == "maximal-transform") return std::make_shared<MaximalTransformOp>(TransformSymbol::random(tree, rng));
  if (name == "hilbert") return std::make_shared<HilbertOp>(tree);
  if (name == "hilbert-adjoint") return std::make_shared<HilbertOp>(tree, true);
  if (name == "fractional") return std::make_shared<FractionalOp>(tree, alpha);
  if (name == "identity") return std::make_shared<IdentityOp>(tree);
  if (name == "expectation") {
    std::uniform_int_distribution<std::size_t> lvl(0, tree->depth());
    return std::make_shared<ExpectationOp>(tree, lvl(rng));
  }
  if (name == "cesaro") {
    if (tree->measure_kind() != MeasureKind::uniform || !tree->is_binary())
      throw std::invalid_argument("cesaro: needs the uniform dyadic tree");
    auto ctx = std::make_shared<WalshContext>(tree->depth(), std::max(tree->leaves(), kDefaultMaxLeaves));
    if (!same_tree(ctx->tree(), tree)) throw std::invalid_argument("cesaro: needs the uniform dyadic tree");
    return std::make_shared<CesaroOp>(std::move(ctx));
  }
  throw std::invalid_argument("unknown operator: " + name);
}

}  // namespace martkit
