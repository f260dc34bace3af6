#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "vrm/velocity.hpp"

namespace vrm {

namespace {

using Complex = std::complex<double>;

struct Node {
  Vec2 lo;
  Vec2 hi;
  Vec2 center;
  double radius = 0.0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::array<int, 4> children{-1, -1, -1, -1};
  bool leaf = true;
  std::size_t coeff_offset = 0;
};

class QuadTree {
 public:
  QuadTree(std::span<const Vec2> pos, std::span<const double> gamma, const TreecodeParams& params)
      : params_(params) {
    order_.reserve(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (gamma[i] != 0.0) order_.push_back(i);
    }
    pos_.resize(order_.size());
    gamma_.resize(order_.size());
    if (order_.empty()) return;

    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (std::size_t i : order_) {
      lo = {std::min(lo.x, pos[i].x), std::min(lo.y, pos[i].y)};
      hi = {std::max(hi.x, pos[i].x), std::max(hi.y, pos[i].y)};
    }
    // Square root cell so that children stay square.
    const double side = std::max(hi.x - lo.x, hi.y - lo.y);
    hi = lo + Vec2{side, side};
    build(pos, 0, order_.size(), lo, hi, 0);
    for (std::size_t k = 0; k < order_.size(); ++k) {
      pos_[k] = pos[order_[k]];
      gamma_[k] = gamma[order_[k]];
    }
    const auto p = static_cast<std::size_t>(params_.order);
    coeffs_.assign(nodes_.size() * p, Complex{});
    for (std::size_t n = 0; n < nodes_.size(); ++n) expand(nodes_[n], n * p);
  }

  Vec2 evaluate(Vec2 x, double eps) const {
    if (nodes_.empty()) return {0.0, 0.0};
    const double near = params_.near_field_factor * eps;
    const int p = params_.order;
    double ux = 0.0;
    double uy = 0.0;
    Complex far{};
    std::array<int, 256> stack;
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      const Vec2 d = x - node.center;
      const double dist = norm(d);
      const bool outside_near = dist - node.radius >= near;
      if (outside_near && node.radius <= params_.theta * dist) {
        const Complex inv = 1.0 / Complex(d.x, d.y);
        Complex pw = inv;
        const Complex* a = coeffs_.data() + node.coeff_offset;
        Complex s{};
        for (int k = 0; k < p; ++k) {
          s += a[k] * pw;
          pw *= inv;
        }
        far += s;
        continue;
      }
      if (node.leaf) {
        for (std::size_t j = node.begin; j < node.end; ++j) {
          const Vec2 k = kernel_smoothed(x - pos_[j], eps);
          ux += k.x * gamma_[j];
          uy += k.y * gamma_[j];
        }
        continue;
      }
      for (int c : node.children) {
        if (c >= 0) stack[top++] = c;
      }
    }
    // sum Gamma / (2 pi i (z - z_j)) = u - i v
    constexpr double inv_two_pi = 0.5 / std::numbers::pi;
    return {ux + far.imag() * inv_two_pi, uy + far.real() * inv_two_pi};
  }

 private:
  int build(std::span<const Vec2> pos, std::size_t begin, std::size_t end, Vec2 lo, Vec2 hi,
            int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Node node;
    node.lo = lo;
    node.hi = hi;
    node.center = 0.5 * (lo + hi);
    node.begin = begin;
    node.end = end;
    for (std::size_t k = begin; k < end; ++k) {
      node.radius = std::max(node.radius, norm(pos[order_[k]] - node.center));
    }
    if (end - begin > params_.leaf_size && depth < 48) {
      node.leaf = false;
      const Vec2 mid = node.center;
      auto quadrant = [&](std::size_t idx) {
        const Vec2 p = pos[idx];
        return (p.x >= mid.x ? 1 : 0) + (p.y >= mid.y ? 2 : 0);
      };
      std::array<std::size_t, 5> bounds{};
      bounds[0] = begin;
      auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
      auto last = order_.begin() + static_cast<std::ptrdiff_t>(end);
      for (int q = 0; q < 4; ++q) {
        auto split = std::stable_partition(first, last, [&](std::size_t i) { return quadrant(i) == q; });
        bounds[q + 1] = static_cast<std::size_t>(split - order_.begin());
        first = split;
      }
      for (int q = 0; q < 4; ++q) {
        if (bounds[q + 1] == bounds[q]) continue;
        const Vec2 clo{(q & 1) ? mid.x : lo.x, (q & 2) ? mid.y : lo.y};
        const Vec2 chi{(q & 1) ? hi.x : mid.x, (q & 2) ? hi.y : mid.y};
        node.children[q] = build(pos, bounds[q], bounds[q + 1], clo, chi, depth + 1);
      }
    }
    nodes_[id] = node;
    return id;
  }

  void expand(Node& node, std::size_t offset) {
    node.coeff_offset = offset;
    Complex* a = coeffs_.data() + offset;
    for (std::size_t j = node.begin; j < node.end; ++j) {
      const Complex dz(pos_[j].x - node.center.x, pos_[j].y - node.center.y);
      Complex pw(gamma_[j], 0.0);
      for (int k = 0; k < params_.order; ++k) {
        a[k] += pw;
        pw *= dz;
      }
    }
  }

  TreecodeParams params_;
  std::vector<std::size_t> order_;
  std::vector<Vec2> pos_;
  std::vector<double> gamma_;
  std::vector<Node> nodes_;
  std::vector<Complex> coeffs_;
};

}  // namespace

std::vector<Vec2> velocity_treecode(std::span<const Vec2> sources, std::span<const double> gamma,
                                    std::span<const Vec2> targets, double eps,
                                    const TreecodeParams& params, int threads) {
  if (!(params.theta > 0.0 && params.theta < 1.0)) {
    throw std::invalid_argument("treecode: theta must lie in (0, 1)");
  }
  if (params.order < 1) throw std::invalid_argument("treecode: order must be positive");
  const QuadTree tree(sources, gamma, params);
  std::vector<Vec2> out(targets.size());
  const auto nt = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel for schedule(dynamic, 256) num_threads(threads)
  for (std::ptrdiff_t t = 0; t < nt; ++t) out[t] = tree.evaluate(targets[t], eps);
  return out;
}

}  // namespace vrm
