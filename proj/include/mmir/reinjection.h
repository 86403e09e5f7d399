#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mmir::reinjection {

enum class Activation { kRelu, kSilu };

double activate(Activation activation, double v) noexcept;
Activation activation_from_name(const std::string& name);
std::string activation_name(Activation activation);

// Bias-free feed-forward block. w1 and w2 are d x D, row-major; column i of w1 is the
// i-th key and column i of w2 the i-th value.
class FfnParams {
 public:
  FfnParams(std::size_t d, std::size_t hidden, std::vector<double> w1, std::vector<double> w2,
            Activation activation = Activation::kRelu);

  std::size_t d() const noexcept { return d_; }
  std::size_t hidden() const noexcept { return hidden_; }
  Activation activation() const noexcept { return activation_; }
  const std::vector<double>& w1() const noexcept { return w1_; }
  const std::vector<double>& w2() const noexcept { return w2_; }
  double w1_at(std::size_t row, std::size_t col) const { return w1_[row * hidden_ + col]; }
  double w2_at(std::size_t row, std::size_t col) const { return w2_[row * hidden_ + col]; }

 private:
  std::size_t d_;
  std::size_t hidden_;
  std::vector<double> w1_;
  std::vector<double> w2_;
  Activation activation_;
};

// Visual tokens already projected to the model dimension d.
class VisualTokenSet {
 public:
  VisualTokenSet() = default;
  explicit VisualTokenSet(std::vector<std::vector<double>> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::vector<double>>& tokens() const noexcept { return tokens_; }
  // 0 when empty.
  std::size_t dim() const noexcept { return tokens_.empty() ? 0 : tokens_.front().size(); }

 private:
  std::vector<std::vector<double>> tokens_;
};

struct InjectionConfig {
  double alpha = 0.3;
  std::set<std::size_t> layers;

  void validate() const;
};

// phi(x W1) W2^T as dense products.
std::vector<double> ffn_matrix(std::span<const double> x, const FfnParams& params);

// sum_i phi(<x, k_i>) v_i over the D key/value columns.
std::vector<double> ffn_keyvalue(std::span<const double> x, const FfnParams& params);

// sum_j phi(<x, z_j>) z_j: each visual token acts as key and value.
std::vector<double> visual_correction(std::span<const double> x, const VisualTokenSet& zv, Activation activation);

// alpha * correction + (1 - alpha) * ffn_matrix. Reads nothing beyond its arguments.
std::vector<double> ffn_fused(std::span<const double> x, const FfnParams& params, const VisualTokenSet& zv,
                              double alpha);

// |a - b|_inf / (1 + |b|_inf)
double relative_deviation(std::span<const double> a, std::span<const double> b);

}  // namespace mmir::reinjection
