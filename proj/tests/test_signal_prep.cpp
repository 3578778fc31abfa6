#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "tsmotif/fft.hpp"
#include "tsmotif/signal_prep.hpp"

using namespace tsmotif;

namespace {

Recording make_recording(std::vector<std::vector<double>> data, double rate) {
  Recording rec;
  rec.rate = rate;
  rec.data = std::move(data);
  for (std::size_t c = 0; c < rec.data.size(); ++c)
    rec.channels.push_back("ch" + std::to_string(c));
  return rec;
}

Recording sinusoid(double freq, double rate, double seconds, double amplitude = 1.0) {
  const auto n = static_cast<std::size_t>(seconds * rate);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude * std::sin(2.0 * 3.14159265358979323846 * freq *
                                static_cast<double>(i) / rate);
  return make_recording({x}, rate);
}

double peak_frequency(const std::vector<double>& x, double rate) {
  const auto mag = magnitude_spectrum(x);
  std::size_t best = 1;
  for (std::size_t i = 1; i < mag.size(); ++i)
    if (mag[i] > mag[best]) best = i;
  const double fft_n = static_cast<double>(next_pow2(x.size()));
  return static_cast<double>(best) * rate / fft_n;
}

}  // namespace

TEST_CASE("decimate reduces the rate and keeps every factor-th sample") {
  const auto rec = make_recording({{1, 2, 3, 4, 5, 6}}, 1000.0);
  const auto out = decimate(rec, 2);
  REQUIRE(out.rate == 500.0);
  REQUIRE(out.data[0] == std::vector<double>{1, 3, 5});
  REQUIRE(decimate(rec, 4).rate == 250.0);
}

TEST_CASE("decimate by 1 is the identity") {
  const auto rec = make_recording({{1, 2, 3}}, 100.0);
  const auto out = decimate(rec, 1);
  REQUIRE(out.data == rec.data);
  REQUIRE(out.rate == rec.rate);
}

TEST_CASE("decimate rejects factor zero") {
  REQUIRE_THROWS_AS(decimate(make_recording({{1, 2}}, 10.0), 0), std::invalid_argument);
}

TEST_CASE("decimate composes") {
  const auto rec = make_recording({oracle::gaussian_noise(1, 240)}, 120.0);
  const auto two_step = decimate(decimate(rec, 2), 3);
  const auto one_step = decimate(rec, 6);
  REQUIRE(two_step.data == one_step.data);
  REQUIRE(two_step.rate == one_step.rate);
}

TEST_CASE("trim_edges removes the requested seconds at both ends") {
  const auto rec = make_recording({oracle::gaussian_noise(2, 6000)}, 10.0);  // 600 s
  REQUIRE(trim_edges(rec, 30.0).n_samples() == 5400);  // 540 s remain

  const auto small = make_recording({{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}, 1.0);
  const auto out = trim_edges(small, 2.0);
  REQUIRE(out.data[0] == std::vector<double>{2, 3, 4, 5, 6, 7});
}

TEST_CASE("trim_edges zero seconds is the identity") {
  const auto rec = make_recording({{1, 2, 3}}, 10.0);
  REQUIRE(trim_edges(rec, 0.0).data == rec.data);
}

TEST_CASE("trim_edges rejects over-long trims") {
  REQUIRE_THROWS_AS(trim_edges(make_recording({{1, 2, 3}}, 1.0), 2.0),
                    std::invalid_argument);
}

TEST_CASE("average_reference subtracts the cross-channel mean") {
  const auto out = average_reference(make_recording({{1, 1}, {3, 3}}, 10.0));
  REQUIRE(out.data[0] == std::vector<double>{-1, -1});
  REQUIRE(out.data[1] == std::vector<double>{1, 1});
}

TEST_CASE("average_reference zeroes identical channels") {
  const auto out = average_reference(make_recording({{2, 2, 2}, {2, 2, 2}}, 10.0));
  for (const auto& ch : out.data)
    for (double v : ch) REQUIRE(v == 0.0);
}

TEST_CASE("average_reference makes column sums vanish and is idempotent") {
  const auto rec = make_recording({oracle::gaussian_noise(3, 100),
                                   oracle::gaussian_noise(4, 100),
                                   oracle::gaussian_noise(5, 100)},
                                  100.0);
  const auto once = average_reference(rec);
  for (std::size_t t = 0; t < once.n_samples(); ++t) {
    double sum = 0.0;
    for (const auto& ch : once.data) sum += ch[t];
    REQUIRE(std::abs(sum) <= 1e-9);
  }
  const auto twice = average_reference(once);
  for (std::size_t c = 0; c < once.data.size(); ++c)
    for (std::size_t t = 0; t < once.n_samples(); ++t)
      REQUIRE(twice.data[c][t] == Catch::Approx(once.data[c][t]).margin(1e-9));
}

TEST_CASE("average_reference needs at least two channels") {
  REQUIRE_THROWS_AS(average_reference(make_recording({{1, 2}}, 10.0)),
                    std::invalid_argument);
}

TEST_CASE("bandpass keeps in-band and rejects out-of-band tones") {
  const auto in_band = bandpass(sinusoid(20.0, 250.0, 8.0), 12.0, 30.0);
  double peak = 0.0;
  for (std::size_t i = 500; i + 500 < in_band.n_samples(); ++i)
    peak = std::max(peak, std::abs(in_band.data[0][i]));
  REQUIRE(peak >= 0.9);

  const auto out_band = bandpass(sinusoid(2.0, 250.0, 8.0), 12.0, 30.0);
  double leak = 0.0;
  for (std::size_t i = 500; i + 500 < out_band.n_samples(); ++i)
    leak = std::max(leak, std::abs(out_band.data[0][i]));
  REQUIRE(leak <= 0.1);
}

TEST_CASE("bandpass maps zero to zero and is linear") {
  const auto zero = bandpass(make_recording({std::vector<double>(500, 0.0)}, 100.0), 4.0, 30.0);
  for (double v : zero.data[0]) REQUIRE(v == Catch::Approx(0.0).margin(1e-12));

  const auto x = oracle::gaussian_noise(6, 400);
  const auto y = oracle::gaussian_noise(7, 400);
  std::vector<double> combo(400);
  for (std::size_t i = 0; i < 400; ++i) combo[i] = 2.0 * x[i] - 0.5 * y[i];
  const auto fx = bandpass(make_recording({x}, 100.0), 4.0, 30.0).data[0];
  const auto fy = bandpass(make_recording({y}, 100.0), 4.0, 30.0).data[0];
  const auto fc = bandpass(make_recording({combo}, 100.0), 4.0, 30.0).data[0];
  double scale = 0.0;
  for (double v : fc) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < 400; ++i)
    REQUIRE(fc[i] == Catch::Approx(2.0 * fx[i] - 0.5 * fy[i]).margin(1e-6 * scale));
}

TEST_CASE("bandpass rejects a high cutoff at the Nyquist rate") {
  REQUIRE_THROWS_AS(bandpass(sinusoid(5.0, 100.0, 2.0), 1.0, 50.0), std::invalid_argument);
}

TEST_CASE("artifact rejection removes exactly the spiked window") {
  auto noise = oracle::gaussian_noise(8, 6000);
  // rate 100, 2 s windows -> window 15 covers samples [3000, 3200)
  for (std::size_t i = 3000; i < 3200; ++i) noise[i] *= 100.0;
  const auto rec = make_recording({noise}, 100.0);
  const auto result = reject_artifact_windows(rec, 2.0, 3.0);
  REQUIRE(result.removed_windows == std::vector<std::size_t>{15});
  REQUIRE(result.recording.n_samples() == 5800);
  REQUIRE(result.recording.n_samples() % 200 == 0);
  REQUIRE(result.recording.boundaries == std::vector<std::size_t>{3000});
}

TEST_CASE("artifact rejection leaves uniform noise alone") {
  const auto rec = make_recording({oracle::gaussian_noise(9, 1000)}, 100.0);
  const auto result = reject_artifact_windows(rec, 2.0, 10.0);
  REQUIRE(result.removed_windows.empty());
  REQUIRE(result.recording.data == rec.data);
}

TEST_CASE("artifact rejection with an infinite threshold is the identity") {
  const auto rec = make_recording({oracle::gaussian_noise(10, 950)}, 100.0);
  const auto result =
      reject_artifact_windows(rec, 2.0, std::numeric_limits<double>::infinity());
  REQUIRE(result.removed_windows.empty());
  REQUIRE(result.recording.data == rec.data);
}

TEST_CASE("extract_band hits the per-band target rates") {
  const auto rec = make_recording({oracle::gaussian_noise(11, 2500),
                                   oracle::gaussian_noise(12, 2500)},
                                  250.0);
  REQUIRE(extract_band(rec, {"theta", 4.0, 8.0, 16.0}).rate == 16.0);
  REQUIRE(extract_band(rec, {"alpha", 8.0, 12.0, 24.0}).rate == 24.0);
  REQUIRE(extract_band(rec, {"beta", 12.0, 30.0, 60.0}).rate == 60.0);
}

TEST_CASE("extract_band preserves an in-band tone's frequency") {
  const auto rec = sinusoid(10.0, 250.0, 8.0);
  const auto out = extract_band(rec, {"alpha", 8.0, 12.0, 24.0});
  REQUIRE(out.rate == 24.0);
  REQUIRE(peak_frequency(out.data[0], 24.0) == Catch::Approx(10.0).margin(0.5));
}
