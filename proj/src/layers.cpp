#include "explorium/layers.hpp"

#include <cmath>
#include <sstream>

namespace explorium {
namespace {

std::size_t parse_positive(const std::string& text, const std::string& whole) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || v == 0) throw ConfigurationError("bad architecture '" + whole + "' near '" + text + "'");
  return v;
}

}  // namespace

ArchSpec parse_arch(const std::string& text) {
  if (text == "dqn") return parse_arch("c32:8:4,c64:4:2,c64:3:1,f256");
  if (text == "toy") return parse_arch("c16:4:2,c32:3:1,f256");
  ArchSpec arch;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.size() < 2) throw ConfigurationError("bad architecture '" + text + "'");
    if (item[0] == 'c') {
      if (!arch.hidden.empty()) throw ConfigurationError("architecture '" + text + "': conv after linear");
      std::stringstream parts(item.substr(1));
      std::string c, k, s;
      if (!std::getline(parts, c, ':') || !std::getline(parts, k, ':') || !std::getline(parts, s) ||
          parts.peek() != EOF) {
        throw ConfigurationError("bad conv spec '" + item + "' in '" + text + "'");
      }
      arch.convs.push_back({parse_positive(c, text), parse_positive(k, text), parse_positive(s, text)});
    } else if (item[0] == 'f') {
      arch.hidden.push_back(parse_positive(item.substr(1), text));
    } else {
      throw ConfigurationError("bad architecture '" + text + "' near '" + item + "'");
    }
  }
  return arch;
}

std::string to_string(const ArchSpec& arch) {
  std::string out;
  for (const auto& c : arch.convs) {
    if (!out.empty()) out += ",";
    out += "c" + std::to_string(c.channels) + ":" + std::to_string(c.kernel) + ":" + std::to_string(c.stride);
  }
  for (auto h : arch.hidden) {
    if (!out.empty()) out += ",";
    out += "f" + std::to_string(h);
  }
  return out;
}

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride) {
  if (input < kernel || (input - kernel) % stride != 0) {
    throw ConfigurationError("conv kernel " + std::to_string(kernel) + " stride " + std::to_string(stride) +
                             " does not tile extent " + std::to_string(input));
  }
  return (input - kernel) / stride + 1;
}

template <typename T>
void kaiming_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
Conv2d<T>::Conv2d(const std::string& prefix, std::size_t in_channels, const ConvSpec& spec, Rng& rng)
    : weight(prefix + "/w", Tensor<T>({spec.channels, in_channels, spec.kernel, spec.kernel})),
      bias(prefix + "/b", Tensor<T>({spec.channels})),
      stride(spec.stride) {
  kaiming_uniform(weight.value, in_channels * spec.kernel * spec.kernel, rng);
}

template <typename T>
Deconv2d<T>::Deconv2d(const std::string& prefix, std::size_t in_channels, std::size_t out_channels,
                      std::size_t kernel, std::size_t stride_, Rng& rng)
    : weight(prefix + "/w", Tensor<T>({in_channels, out_channels, kernel, kernel})),
      bias(prefix + "/b", Tensor<T>({out_channels})),
      stride(stride_) {
  // Each output pixel receives about ceil(K/s)^2 taps per input channel.
  const std::size_t taps = (kernel + stride_ - 1) / stride_;
  kaiming_uniform(weight.value, in_channels * taps * taps, rng);
}

template <typename T>
Linear<T>::Linear(const std::string& prefix, std::size_t in, std::size_t out, Rng& rng)
    : weight(prefix + "/w", Tensor<T>({out, in})), bias(prefix + "/b", Tensor<T>({out})) {
  kaiming_uniform(weight.value, in, rng);
}

template void kaiming_uniform(Tensor<float>&, std::size_t, Rng&);
template void kaiming_uniform(Tensor<double>&, std::size_t, Rng&);
template struct Conv2d<float>;
template struct Conv2d<double>;
template struct Deconv2d<float>;
template struct Deconv2d<double>;
template struct Linear<float>;
template struct Linear<double>;

}  // namespace explorium
