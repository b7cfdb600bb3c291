#pragma once

#include "sfd/core/tensor.hpp"
#include "sfd/net/fusion.hpp"

// Training losses on 1 x H x W planes. Every function returns a scalar
// tensor recorded on the active tape.
namespace sfd::losses {

struct LossWeights {
  double lambda_s = 10.0;  // saliency term
  double alpha_1 = 5.0;    // intensity term inside the content loss
  double alpha_2 = 10.0;   // gradient term inside the content loss
  double beta = 5.0;       // in-mask weight inside the saliency loss
};

/// Throws ConfigError on a negative weight.
void validate(const LossWeights& w);

/// mean |fused - max(ir, vis)|
Tensor loss_int(const Tensor& fused, const Tensor& ir, const Tensor& vis);

/// mean | |grad fused| - max(|grad ir|, |grad vis|) | with |grad x| = |sobel_x| + |sobel_y|.
Tensor loss_grad(const Tensor& fused, const Tensor& ir, const Tensor& vis);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 1e-4;  // (0.01 L)^2, L = 1
inline constexpr double kSsimC2 = 9e-4;  // (0.03 L)^2

/// Mean SSIM over valid 11 x 11 Gaussian window positions. Throws
/// ContractError when the image is smaller than the window.
Tensor ssim(const Tensor& a, const Tensor& b);

/// (1 - SSIM(fused, ir)) / 2 + (1 - SSIM(fused, vis)) / 2
Tensor loss_ssim(const Tensor& fused, const Tensor& ir, const Tensor& vis);

/// beta * mean |M ir - M fused| + mean |(1-M) vis - (1-M) fused|
Tensor loss_saliency(const Tensor& fused, const Tensor& ir, const Tensor& vis, const Tensor& mask, double beta);

inline constexpr double kPearsonEps = 1e-8;

/// Pearson correlation of x and y over the pixels where mask is 1:
/// cov / sqrt((var_x + eps)(var_y + eps)). An empty region gives 0.
Tensor masked_pearson(const Tensor& x, const Tensor& y, const Tensor& mask, double eps = kPearsonEps);

enum class FreSign {
  Corrected,  // 2 - (cc_in + cc_out), minimized when both correlations are 1
  Literal,    // cc_in + cc_out
};

struct FreLoss {
  Tensor value;
  /// True when the mask is all zeros or all ones, so one correlation is 0 by definition.
  bool empty_region = false;
};

/// Consistency of the frequency branch's spatial plane with the sources:
/// the infrared image inside the mask and the visible image outside it.
FreLoss loss_fre(const Tensor& freq_spatial, const Tensor& ir, const Tensor& vis, const Tensor& mask,
                 FreSign sign = FreSign::Corrected);

/// Same, starting from the fused polar spectrum.
FreLoss loss_fre(const Tensor& amp, const Tensor& pha, const Tensor& ir, const Tensor& vis, const Tensor& mask,
                 FreSign sign = FreSign::Corrected);

struct LossBreakdown {
  double l_int = 0, l_grad = 0, l_content = 0, l_ssim = 0, l_saliency = 0, l_fre = 0, l_total = 0;
  bool fre_region_empty = false;
};

/// Content and total recomputed in double from the component values.
LossBreakdown combine(double l_int, double l_grad, double l_ssim, double l_saliency, double l_fre,
                      const LossWeights& w);

struct LossTerms {
  Tensor total;  // differentiable weighted sum
  LossBreakdown breakdown;
};

struct LossOptions {
  LossWeights weights;
  bool use_lfre = true;
  FreSign fre_sign = FreSign::Corrected;
};

/// Loss for one item. The frequency term contributes 0 when it is disabled
/// or `freq_spatial` is undefined (no frequency branch).
LossTerms total_loss(const Tensor& fused, const Tensor& freq_spatial, const Tensor& ir, const Tensor& vis,
                     const Tensor& mask, const LossOptions& options);

LossTerms total_loss(const net::ForwardResult& out, const Tensor& ir, const Tensor& vis, const Tensor& mask,
                     const LossOptions& options);

/// Component-wise mean; the empty-region flag is the OR of the items.
LossBreakdown mean_breakdown(const std::vector<LossBreakdown>& items);

}  // namespace sfd::losses
