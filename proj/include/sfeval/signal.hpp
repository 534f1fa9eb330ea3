#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sfeval {

/// Sample-rate-tagged matrix of audio, one row per channel.
struct MultichannelSignal {
  double sample_rate = 48000.0;
  Eigen::MatrixXd samples;  // channels x frames

  MultichannelSignal() = default;
  MultichannelSignal(double rate, Eigen::MatrixXd data)
      : sample_rate(rate), samples(std::move(data)) {}

  int channels() const { return static_cast<int>(samples.rows()); }
  long frames() const { return static_cast<long>(samples.cols()); }

  std::vector<double> channel(int i) const {
    std::vector<double> out(static_cast<size_t>(samples.cols()));
    Eigen::Map<Eigen::RowVectorXd>(out.data(), samples.cols()) = samples.row(i);
    return out;
  }
};

/// Left/right ear signal pair.
struct BinauralPair {
  double sample_rate = 48000.0;
  std::vector<double> left;
  std::vector<double> right;

  size_t size() const { return left.size(); }
};

}  // namespace sfeval
