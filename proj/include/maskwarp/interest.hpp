#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace maskwarp {

// Point and descriptor heads of an interest-point detector on an hc x wc
// cell grid, both stored row-major and channel-last.
class InterestHeads {
 public:
  InterestHeads() = default;
  InterestHeads(int hc, int wc, int point_channels, int desc_channels, int cell_size,
                std::vector<double> point_head, std::vector<double> desc_head);

  int hc() const noexcept { return hc_; }
  int wc() const noexcept { return wc_; }
  int point_channels() const noexcept { return point_channels_; }
  int desc_channels() const noexcept { return desc_channels_; }
  int cell_size() const noexcept { return cell_size_; }

  const double* point(int h, int w) const noexcept {
    return &point_[(static_cast<std::size_t>(h) * wc_ + w) * point_channels_];
  }
  const double* desc(int h, int w) const noexcept {
    return &desc_[(static_cast<std::size_t>(h) * wc_ + w) * desc_channels_];
  }
  const std::vector<double>& point_head() const noexcept { return point_; }
  const std::vector<double>& desc_head() const noexcept { return desc_; }

  friend bool operator==(const InterestHeads&, const InterestHeads&) = default;

 private:
  int hc_ = 0;
  int wc_ = 0;
  int point_channels_ = 0;
  int desc_channels_ = 0;
  int cell_size_ = 8;
  std::vector<double> point_;
  std::vector<double> desc_;
};

// Row-major 3x3 projective map acting on (x, y, 1).
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double determinant() const noexcept;
  bool invertible() const noexcept;
  // Returns false when the point maps to infinity.
  bool project(double x, double y, double& px, double& py) const noexcept;
};

struct IRParams {
  double lambda = 0.00005;
  double mu = 1.0;
  double m_p = 1.0;
  double m_n = 0.2;
  double beta_d = 250.0;
  double tau = 8.0;
  Homography homography;

  void validate() const;
};

// g[h][w][i][j] = 1 when the projected centre of cell (h,w) lies within tau
// pixels of the centre of cell (i,j).
class CorrespondenceGrid {
 public:
  CorrespondenceGrid(int hc, int wc, std::vector<std::uint8_t> bits);

  int hc() const noexcept { return hc_; }
  int wc() const noexcept { return wc_; }
  bool operator()(int h, int w, int i, int j) const noexcept {
    const std::size_t cells = static_cast<std::size_t>(hc_) * wc_;
    return bits_[(static_cast<std::size_t>(h) * wc_ + w) * cells + static_cast<std::size_t>(i) * wc_ + j] != 0;
  }
  std::size_t positives() const noexcept;

 private:
  int hc_;
  int wc_;
  std::vector<std::uint8_t> bits_;
};

CorrespondenceGrid correspondence_grid(int hc, int wc, const Homography& homography,
                                       int cell_size, double tau);

// Mean over cells of the squared l2 distance between point-head vectors.
double point_loss(const InterestHeads& n, const InterestHeads& o);

// Hinge loss over all ordered cell pairs, normalized by (hc*wc)^2.
double descriptor_loss(const InterestHeads& n, const InterestHeads& o,
                       const CorrespondenceGrid& g, const IRParams& params);

struct IRLoss {
  double total = 0.0;
  double point = 0.0;
  double desc = 0.0;
};

IRLoss ir_loss(const InterestHeads& n, const InterestHeads& o, const IRParams& params);

// Stylization objective: the caller's style/content loss plus mu * L_IR.
double ictt_loss(double nst_loss, const IRLoss& ir, double mu);

}  // namespace maskwarp
