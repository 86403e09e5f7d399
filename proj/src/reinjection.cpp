#include "mmir/reinjection.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mmir/errors.h"

namespace mmir::reinjection {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_dim(std::span<const double> x, std::size_t d) {
  if (x.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has dim " + std::to_string(x.size()) + ", expected " + std::to_string(d));
  }
}

}  // namespace

double activate(Activation activation, double v) noexcept {
  switch (activation) {
    case Activation::kRelu:
      return v > 0.0 ? v : 0.0;
    case Activation::kSilu:
      return v / (1.0 + std::exp(-v));
  }
  return v;
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "silu") return Activation::kSilu;
  throw Error(ErrorCode::kInvalidArgument, "unknown activation '" + name + "'");
}

std::string activation_name(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "silu";
}

FfnParams::FfnParams(std::size_t d, std::size_t hidden, std::vector<double> w1, std::vector<double> w2,
                     Activation activation)
    : d_(d), hidden_(hidden), w1_(std::move(w1)), w2_(std::move(w2)), activation_(activation) {
  if (d_ == 0 || hidden_ == 0) throw Error(ErrorCode::kInvalidArgument, "d and D must be positive");
  if (w1_.size() != d_ * hidden_ || w2_.size() != d_ * hidden_) {
    throw Error(ErrorCode::kDimensionMismatch, "w1 and w2 must both be d x D");
  }
}

VisualTokenSet::VisualTokenSet(std::vector<std::vector<double>> tokens) : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.size() != tokens_.front().size()) {
      throw Error(ErrorCode::kDimensionMismatch, "visual tokens must share one dimension");
    }
  }
}

void InjectionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha " + std::to_string(alpha) + " outside [0,1]");
  }
}

std::vector<double> ffn_matrix(std::span<const double> x, const FfnParams& params) {
  require_dim(x, params.d());
  const auto d = static_cast<Eigen::Index>(params.d());
  const auto hidden = static_cast<Eigen::Index>(params.hidden());
  Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), d);
  Eigen::Map<const RowMajorMatrix> w1(params.w1().data(), d, hidden);
  Eigen::Map<const RowMajorMatrix> w2(params.w2().data(), d, hidden);

  const Eigen::RowVectorXd pre = xv * w1;
  const Eigen::RowVectorXd act = pre.unaryExpr([&](double v) { return activate(params.activation(), v); });
  const Eigen::RowVectorXd out = act * w2.transpose();
  return {out.data(), out.data() + out.size()};
}

std::vector<double> ffn_keyvalue(std::span<const double> x, const FfnParams& params) {
  require_dim(x, params.d());
  const std::size_t d = params.d();
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < params.hidden(); ++i) {
    double key_dot = 0.0;
    for (std::size_t r = 0; r < d; ++r) key_dot += x[r] * params.w1_at(r, i);
    const double gate = activate(params.activation(), key_dot);
    for (std::size_t r = 0; r < d; ++r) out[r] += gate * params.w2_at(r, i);
  }
  return out;
}

std::vector<double> visual_correction(std::span<const double> x, const VisualTokenSet& zv, Activation activation) {
  std::vector<double> out(x.size(), 0.0);
  if (zv.empty()) return out;
  require_dim(x, zv.dim());
  for (const auto& z : zv.tokens()) {
    double key_dot = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r) key_dot += x[r] * z[r];
    const double gate = activate(activation, key_dot);
    for (std::size_t r = 0; r < x.size(); ++r) out[r] += gate * z[r];
  }
  return out;
}

std::vector<double> ffn_fused(std::span<const double> x, const FfnParams& params, const VisualTokenSet& zv,
                              double alpha) {
  InjectionConfig{alpha, {}}.validate();
  require_dim(x, params.d());
  const auto correction = visual_correction(x, zv, params.activation());
  const auto vanilla = ffn_matrix(x, params);
  std::vector<double> out(vanilla.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = alpha * correction[r] + (1.0 - alpha) * vanilla[r];
  return out;
}

double relative_deviation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "relative_deviation of unequal lengths");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) return std::numeric_limits<double>::infinity();
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / (1.0 + scale);
}

}  // namespace mmir::reinjection
