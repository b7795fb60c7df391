#include "explorium/ops.hpp"

#include <Eigen/Core>

#include <string>

namespace explorium::ops {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;

struct ImageDims {
  std::size_t batch = 1;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  bool batched = false;

  std::size_t plane() const { return height * width; }
  std::size_t image() const { return channels * height * width; }
};

ImageDims image_dims(const Shape& s, const char* op) {
  if (s.size() == 3) return {1, s[0], s[1], s[2], false};
  if (s.size() == 4) return {s[0], s[1], s[2], s[3], true};
  throw ConfigurationError(std::string(op) + ": expected [C,H,W] or [B,C,H,W], got " + shape_string(s));
}

Shape image_shape(const ImageDims& d, std::size_t c, std::size_t h, std::size_t w) {
  if (d.batched) return {d.batch, c, h, w};
  return {c, h, w};
}

template <typename T>
void require_finite(const Tensor<T>& t, const char* op) {
  if (!t.all_finite()) throw NumericError(std::string(op) + ": non-finite input");
}

// cols[(c*K + ki)*K + kj][oh*Wo + ow] = img[c][oh*s + ki][ow*s + kj]
template <typename T>
void im2col(const T* img, std::size_t C, std::size_t H, std::size_t W, std::size_t K, std::size_t s,
            std::size_t Ho, std::size_t Wo, T* cols) {
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t ki = 0; ki < K; ++ki) {
      for (std::size_t kj = 0; kj < K; ++kj) {
        T* row = cols + ((c * K + ki) * K + kj) * Ho * Wo;
        for (std::size_t oh = 0; oh < Ho; ++oh) {
          const T* src = img + (c * H + oh * s + ki) * W + kj;
          for (std::size_t ow = 0; ow < Wo; ++ow) row[oh * Wo + ow] = src[ow * s];
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds cols back into img.
template <typename T>
void col2im(const T* cols, std::size_t C, std::size_t H, std::size_t W, std::size_t K, std::size_t s,
            std::size_t Ho, std::size_t Wo, T* img) {
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t ki = 0; ki < K; ++ki) {
      for (std::size_t kj = 0; kj < K; ++kj) {
        const T* row = cols + ((c * K + ki) * K + kj) * Ho * Wo;
        for (std::size_t oh = 0; oh < Ho; ++oh) {
          T* dst = img + (c * H + oh * s + ki) * W + kj;
          for (std::size_t ow = 0; ow < Wo; ++ow) dst[ow * s] += row[oh * Wo + ow];
        }
      }
    }
  }
}

struct KernelDims {
  std::size_t first = 0;   // conv: C_out, deconv: C_in
  std::size_t second = 0;  // conv: C_in, deconv: C_out
  std::size_t size = 0;
};

KernelDims kernel_dims(const Shape& s, const char* op) {
  if (s.size() != 4 || s[2] != s[3]) {
    throw ConfigurationError(std::string(op) + ": kernels must be [A,B,K,K], got " + shape_string(s));
  }
  return {s[0], s[1], s[2]};
}

void check_bias(const Shape& bias, std::size_t n, const char* op) {
  if (bias.size() != 1 || bias[0] != n) {
    throw ConfigurationError(std::string(op) + ": bias must be [" + std::to_string(n) + "], got " +
                             shape_string(bias));
  }
}

template <typename T>
void accumulate_channel_bias(const T* grad, std::size_t batch, std::size_t channels, std::size_t plane,
                             T* bias_grad) {
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      const T* g = grad + (b * channels + c) * plane;
      T acc{0};
      for (std::size_t i = 0; i < plane; ++i) acc += g[i];
      bias_grad[c] += acc;
    }
  }
}

template <typename T>
Var<T> conv_impl(const Var<T>& input, const Var<T>& kernels, const Var<T>* bias, std::size_t stride) {
  const char* op = "conv2d";
  const ImageDims in = image_dims(input.shape(), op);
  const KernelDims k = kernel_dims(kernels.shape(), op);
  if (stride == 0) throw ConfigurationError("conv2d: stride must be positive");
  if (k.second != in.channels) {
    throw ConfigurationError("conv2d: kernels expect " + std::to_string(k.second) + " input channels, got " +
                             std::to_string(in.channels));
  }
  if (in.height < k.size || in.width < k.size) {
    throw ConfigurationError("conv2d: input " + shape_string(input.shape()) + " smaller than kernel " +
                             std::to_string(k.size));
  }
  if ((in.height - k.size) % stride != 0 || (in.width - k.size) % stride != 0) {
    throw ConfigurationError("conv2d: stride " + std::to_string(stride) + " does not tile input " +
                             shape_string(input.shape()) + " with kernel " + std::to_string(k.size));
  }
  if (bias) check_bias(bias->shape(), k.first, op);
  require_finite(input.value(), op);

  const std::size_t Ho = (in.height - k.size) / stride + 1;
  const std::size_t Wo = (in.width - k.size) / stride + 1;
  const std::size_t patch = in.channels * k.size * k.size;
  const std::size_t C_out = k.first;

  Tensor<T> out(image_shape(in, C_out, Ho, Wo));
  std::vector<T> cols(patch * Ho * Wo);
  ConstMatMap<T> w(kernels.value().data(), C_out, patch);
  ConstMatMap<T> col_map(cols.data(), patch, Ho * Wo);
  for (std::size_t b = 0; b < in.batch; ++b) {
    im2col(input.value().data() + b * in.image(), in.channels, in.height, in.width, k.size, stride, Ho, Wo,
           cols.data());
    MatMap<T> y(out.data() + b * C_out * Ho * Wo, C_out, Ho * Wo);
    y.noalias() = w * col_map;
    if (bias) {
      for (std::size_t c = 0; c < C_out; ++c) y.row(c).array() += bias->value()[c];
    }
  }

  std::vector<Var<T>> inputs{input, kernels};
  if (bias) inputs.push_back(*bias);
  return Var<T>::from_op(std::move(out), std::move(inputs), [in, k, stride, Ho, Wo, patch](auto& node) {
    auto& x = *node.parents[0];
    auto& kw = *node.parents[1];
    const std::size_t C_out = k.first;
    const T* gy = node.grad.data();
    std::vector<T> cols(patch * Ho * Wo);
    MatMap<T> col_map(cols.data(), patch, Ho * Wo);
    ConstMatMap<T> w(kw.val().data(), C_out, patch);
    for (std::size_t b = 0; b < in.batch; ++b) {
      ConstMatMap<T> dy(gy + b * C_out * Ho * Wo, C_out, Ho * Wo);
      if (kw.requires_grad) {
        im2col(x.val().data() + b * in.image(), in.channels, in.height, in.width, k.size, stride, Ho, Wo,
               cols.data());
        MatMap<T> dw(kw.grad_buffer().data(), C_out, patch);
        dw.noalias() += dy * col_map.transpose();
      }
      if (x.requires_grad) {
        col_map.noalias() = w.transpose() * dy;
        col2im(cols.data(), in.channels, in.height, in.width, k.size, stride, Ho, Wo,
               x.grad_buffer().data() + b * in.image());
      }
    }
    if (node.parents.size() > 2 && node.parents[2]->requires_grad) {
      accumulate_channel_bias(gy, in.batch, C_out, Ho * Wo, node.parents[2]->grad_buffer().data());
    }
  });
}

template <typename T>
Var<T> deconv_impl(const Var<T>& input, const Var<T>& kernels, const Var<T>* bias, std::size_t stride) {
  const char* op = "deconv2d";
  const ImageDims in = image_dims(input.shape(), op);
  const KernelDims k = kernel_dims(kernels.shape(), op);
  if (stride == 0) throw ConfigurationError("deconv2d: stride must be positive");
  if (k.first != in.channels) {
    throw ConfigurationError("deconv2d: kernels expect " + std::to_string(k.first) + " input channels, got " +
                             std::to_string(in.channels));
  }
  if (bias) check_bias(bias->shape(), k.second, op);
  require_finite(input.value(), op);

  const std::size_t C_out = k.second;
  const std::size_t Ho = (in.height - 1) * stride + k.size;
  const std::size_t Wo = (in.width - 1) * stride + k.size;
  const std::size_t patch = C_out * k.size * k.size;
  const std::size_t plane = in.plane();
  const std::size_t out_image = C_out * Ho * Wo;

  Tensor<T> out(image_shape(in, C_out, Ho, Wo));
  std::vector<T> cols(patch * plane);
  MatMap<T> col_map(cols.data(), patch, plane);
  ConstMatMap<T> w(kernels.value().data(), in.channels, patch);
  for (std::size_t b = 0; b < in.batch; ++b) {
    ConstMatMap<T> x(input.value().data() + b * in.image(), in.channels, plane);
    col_map.noalias() = w.transpose() * x;
    T* y = out.data() + b * out_image;
    col2im(cols.data(), C_out, Ho, Wo, k.size, stride, in.height, in.width, y);
    if (bias) {
      for (std::size_t c = 0; c < C_out; ++c) {
        T* yc = y + c * Ho * Wo;
        for (std::size_t i = 0; i < Ho * Wo; ++i) yc[i] += bias->value()[c];
      }
    }
  }

  std::vector<Var<T>> inputs{input, kernels};
  if (bias) inputs.push_back(*bias);
  return Var<T>::from_op(std::move(out), std::move(inputs),
                         [in, k, stride, Ho, Wo, patch, plane, out_image](auto& node) {
                           auto& x = *node.parents[0];
                           auto& kw = *node.parents[1];
                           const std::size_t C_out = k.second;
                           const T* gy = node.grad.data();
                           std::vector<T> cols(patch * plane);
                           ConstMatMap<T> col_map(cols.data(), patch, plane);
                           ConstMatMap<T> w(kw.val().data(), in.channels, patch);
                           for (std::size_t b = 0; b < in.batch; ++b) {
                             im2col(gy + b * out_image, C_out, Ho, Wo, k.size, stride, in.height, in.width,
                                    cols.data());
                             if (x.requires_grad) {
                               MatMap<T> dx(x.grad_buffer().data() + b * in.image(), in.channels, plane);
                               dx.noalias() += w * col_map;
                             }
                             if (kw.requires_grad) {
                               ConstMatMap<T> xv(x.val().data() + b * in.image(), in.channels, plane);
                               MatMap<T> dw(kw.grad_buffer().data(), in.channels, patch);
                               dw.noalias() += xv * col_map.transpose();
                             }
                           }
                           if (node.parents.size() > 2 && node.parents[2]->requires_grad) {
                             accumulate_channel_bias(gy, in.batch, C_out, Ho * Wo,
                                                     node.parents[2]->grad_buffer().data());
                           }
                         });
}

template <typename T>
Var<T> linear_impl(const Var<T>& input, const Var<T>& weight, const Var<T>* bias) {
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  if (ws.size() != 2) throw ConfigurationError("linear: weight must be [out,in], got " + shape_string(ws));
  if (xs.size() != 1 && xs.size() != 2) {
    throw ConfigurationError("linear: input must be [in] or [B,in], got " + shape_string(xs));
  }
  const std::size_t batch = xs.size() == 2 ? xs[0] : 1;
  const std::size_t n_in = xs.back();
  const std::size_t n_out = ws[0];
  if (ws[1] != n_in) {
    throw ConfigurationError("linear: weight " + shape_string(ws) + " does not accept input " + shape_string(xs));
  }
  if (bias) check_bias(bias->shape(), n_out, "linear");
  require_finite(input.value(), "linear");

  Tensor<T> out(xs.size() == 2 ? Shape{batch, n_out} : Shape{n_out});
  ConstMatMap<T> x(input.value().data(), batch, n_in);
  ConstMatMap<T> w(weight.value().data(), n_out, n_in);
  MatMap<T> y(out.data(), batch, n_out);
  y.noalias() = x * w.transpose();
  if (bias) {
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bv(bias->value().data(), n_out);
    y.rowwise() += bv;
  }

  std::vector<Var<T>> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  return Var<T>::from_op(std::move(out), std::move(inputs), [batch, n_in, n_out](auto& node) {
    auto& xn = *node.parents[0];
    auto& wn = *node.parents[1];
    ConstMatMap<T> dy(node.grad.data(), batch, n_out);
    if (xn.requires_grad) {
      ConstMatMap<T> w(wn.val().data(), n_out, n_in);
      MatMap<T> dx(xn.grad_buffer().data(), batch, n_in);
      dx.noalias() += dy * w;
    }
    if (wn.requires_grad) {
      ConstMatMap<T> x(xn.val().data(), batch, n_in);
      MatMap<T> dw(wn.grad_buffer().data(), n_out, n_in);
      dw.noalias() += dy.transpose() * x;
    }
    if (node.parents.size() > 2 && node.parents[2]->requires_grad) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(node.parents[2]->grad_buffer().data(), n_out);
      db += dy.colwise().sum();
    }
  });
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernels, const Var<T>& bias, std::size_t stride) {
  return conv_impl(input, kernels, &bias, stride);
}
template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernels, std::size_t stride) {
  return conv_impl<T>(input, kernels, nullptr, stride);
}

template <typename T>
Var<T> deconv2d(const Var<T>& input, const Var<T>& kernels, const Var<T>& bias, std::size_t stride) {
  return deconv_impl(input, kernels, &bias, stride);
}
template <typename T>
Var<T> deconv2d(const Var<T>& input, const Var<T>& kernels, std::size_t stride) {
  return deconv_impl<T>(input, kernels, nullptr, stride);
}

template <typename T>
Var<T> linear(const Var<T>& input, const Var<T>& weight, const Var<T>& bias) {
  return linear_impl(input, weight, &bias);
}
template <typename T>
Var<T> linear(const Var<T>& input, const Var<T>& weight) {
  return linear_impl<T>(input, weight, nullptr);
}

template <typename T>
Var<T> relu(const Var<T>& input) {
  Tensor<T> out = input.value();
  for (auto& v : out.values()) v = v > T{0} ? v : T{0};
  return Var<T>::from_op(std::move(out), {input}, [](auto& node) {
    auto& x = *node.parents[0];
    auto& gx = x.grad_buffer();
    const auto& xv = x.val();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] > T{0}) gx[i] += node.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) {
    throw ConfigurationError("mul: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var<T>::from_op(std::move(out), {a, b}, [](auto& node) {
    auto& an = *node.parents[0];
    auto& bn = *node.parents[1];
    const std::size_t n = node.grad.size();
    if (an.requires_grad) {
      auto& ga = an.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) ga[i] += node.grad[i] * bn.val()[i];
    }
    if (bn.requires_grad) {
      auto& gb = bn.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) gb[i] += node.grad[i] * an.val()[i];
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& input, Shape shape) {
  Tensor<T> out = input.value().reshaped(std::move(shape));
  return Var<T>::from_op(std::move(out), {input}, [](auto& node) {
    auto& gx = node.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += node.grad[i];
  });
}

template <typename T>
Var<T> sum(const Var<T>& input) {
  T acc{0};
  for (T v : input.value().values()) acc += v;
  return Var<T>::from_op(Tensor<T>::scalar(acc), {input}, [](auto& node) {
    auto& gx = node.parents[0]->grad_buffer();
    for (auto& g : gx.values()) g += node.grad[0];
  });
}

template <typename T>
Var<T> mean(const Var<T>& input) {
  const T n = static_cast<T>(input.value().size());
  T acc{0};
  for (T v : input.value().values()) acc += v;
  return Var<T>::from_op(Tensor<T>::scalar(acc / n), {input}, [n](auto& node) {
    auto& gx = node.parents[0]->grad_buffer();
    for (auto& g : gx.values()) g += node.grad[0] / n;
  });
}

template <typename T>
Var<T> sum_last(const Var<T>& input) {
  const Shape& s = input.shape();
  if (s.size() != 1 && s.size() != 2) {
    throw ConfigurationError("sum_last: expected [N] or [B,N], got " + shape_string(s));
  }
  const std::size_t rows = s.size() == 2 ? s[0] : 1;
  const std::size_t cols = s.back();
  Tensor<T> out(Shape{rows});
  for (std::size_t r = 0; r < rows; ++r) {
    T acc{0};
    for (std::size_t c = 0; c < cols; ++c) acc += input.value()[r * cols + c];
    out[r] = acc;
  }
  return Var<T>::from_op(std::move(out), {input}, [rows, cols](auto& node) {
    auto& gx = node.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += node.grad[r];
    }
  });
}

template <typename T>
Var<T> mse_loss(const Var<T>& prediction, const Tensor<T>& target) {
  if (prediction.value().size() != target.size()) {
    throw ConfigurationError("mse_loss: prediction " + shape_string(prediction.shape()) + " vs target " +
                             shape_string(target.shape()));
  }
  const std::size_t n = target.size();
  Tensor<T> diff = prediction.value();
  T acc{0};
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] -= target[i];
    acc += diff[i] * diff[i];
  }
  const T scale = T{2} / static_cast<T>(n);
  return Var<T>::from_op(Tensor<T>::scalar(acc / static_cast<T>(n)), {prediction},
                         [diff = std::move(diff), scale](auto& node) {
                           auto& gx = node.parents[0]->grad_buffer();
                           const T g = node.grad[0] * scale;
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * diff[i];
                         });
}

#define EXPLORIUM_INSTANTIATE_OPS(T)                                                  \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t);   \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, std::size_t);                  \
  template Var<T> deconv2d(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t); \
  template Var<T> deconv2d(const Var<T>&, const Var<T>&, std::size_t);                \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                \
  template Var<T> linear(const Var<T>&, const Var<T>&);                               \
  template Var<T> relu(const Var<T>&);                                                \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                  \
  template Var<T> reshape(const Var<T>&, Shape);                                      \
  template Var<T> sum(const Var<T>&);                                                 \
  template Var<T> mean(const Var<T>&);                                                \
  template Var<T> sum_last(const Var<T>&);                                            \
  template Var<T> mse_loss(const Var<T>&, const Tensor<T>&);

EXPLORIUM_INSTANTIATE_OPS(float)
EXPLORIUM_INSTANTIATE_OPS(double)

}  // namespace explorium::ops
