#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "acomp/checkpoint.hpp"
#include "acomp/config.hpp"
#include "acomp/dataset.hpp"

using namespace acomp;
namespace fs = std::filesystem;

namespace {

DatasetSplit four_images() {
  DatasetSplit s;
  s.count = 4;
  s.height = 2;
  s.width = 3;
  s.channels = 3;
  for (std::size_t i = 0; i < 4 * 18; ++i) s.pixels.push_back(static_cast<std::uint8_t>(i * 7));
  s.labels = {0, 9, 3, 3};
  return s;
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "acomp_io_test";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST_CASE("idx and raw datasets round trip") {
  const auto s = four_images();
  save_idx(s, scratch("split"));
  auto a = load_dataset(scratch("split"), DatasetFormat::idx, 10);
  CHECK(a.pixels == s.pixels);
  CHECK(a.labels == s.labels);
  CHECK(a.height == 2);
  CHECK(a.width == 3);
  auto b = load_dataset(scratch("split-images.idx"), DatasetFormat::automatic, 10);
  CHECK(b.labels == s.labels);

  save_raw(s, scratch("split.raw"));
  auto c = load_dataset(scratch("split.raw"), DatasetFormat::raw, 10);
  CHECK(c.pixels == s.pixels);
  CHECK(c.labels == s.labels);
  CHECK(c.channels == 3);
}

TEST_CASE("bad dataset files") {
  { std::ofstream(scratch("empty.raw"), std::ios::binary); }
  CHECK_THROWS_WITH(load_dataset(scratch("empty.raw"), DatasetFormat::raw, 10), doctest::Contains("bad magic"));
  auto s = four_images();
  save_raw(s, scratch("bad_label.raw"));
  {
    // Label byte of the third image.
    std::fstream f(scratch("bad_label.raw"), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20 + 2 * 19);
    f.put(static_cast<char>(255));
  }
  CHECK_THROWS_WITH(load_dataset(scratch("bad_label.raw"), DatasetFormat::raw, 10), doctest::Contains("out of range"));
  CHECK_THROWS(load_dataset(scratch("missing.raw"), DatasetFormat::raw, 10));
  CHECK_THROWS(parse_dataset_format("png"));
}

TEST_CASE("synthetic dataset is deterministic and balanced") {
  const auto a = make_synthetic_dataset(200, 3, true);
  const auto b = make_synthetic_dataset(200, 3, true);
  CHECK(a.pixels == b.pixels);
  CHECK(a.labels == b.labels);
  CHECK(make_synthetic_dataset(200, 4, true).pixels != a.pixels);
  int counts[10] = {};
  for (int l : a.labels) ++counts[l];
  for (int c : counts) CHECK(c > 5);
}

TEST_CASE("batches are normalized per channel") {
  const auto s = make_synthetic_dataset(64, 1, true);
  const auto norm = Normalization::from(s);
  std::vector<std::size_t> idx(64);
  for (std::size_t i = 0; i < 64; ++i) idx[i] = i;
  const auto x = make_batch(s, idx, norm);
  CHECK(x.shape() == Shape{64, 3, 32, 32});
  double m = 0.0;
  for (float v : x.values()) m += v;
  CHECK(std::abs(m / static_cast<double>(x.numel())) < 1e-3);
}

TEST_CASE("config text round trip") {
  RunConfig c;
  c.seed = 7;
  c.p = 0.125;
  c.init_bits = {4, 5, 6};
  c.thresholds = "0.1,0.3";
  const auto back = parse_config(emit_config(c));
  CHECK(emit_config(back) == emit_config(c));
  CHECK(config_hash(back) == config_hash(c));
  c.p = 0.25;
  CHECK(config_hash(back) != config_hash(c));
  CHECK(back.explicit_thresholds() == std::vector<double>{0.1, 0.3});
}

TEST_CASE("config errors") {
  const auto text = emit_config(RunConfig{});
  const auto cut = text.substr(text.find('\n') + 1);
  CHECK_THROWS_AS(parse_config(cut), ConfigError);
  CHECK_THROWS_AS(parse_config(text + "p = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(text + "nonsense = 1\n"), ConfigError);
  RunConfig c;
  set_config_field(c, "groups", "1");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(set_config_field(c, "p", "abc"), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  NamedTensors t{{"w", Tensor({2, 3}, {1, 2, 3, 4, 5, 6})}, {"s", Tensor::scalar(-0.5f)}};
  const auto back = decode_checkpoint(encode_checkpoint(t));
  REQUIRE(back.size() == 2);
  CHECK(back[0].first == "w");
  CHECK(back[0].second.shape() == Shape{2, 3});
  CHECK(back[0].second.values() == t[0].second.values());
  CHECK(back[1].second.item() == -0.5f);
  save_checkpoint(scratch("ck.bin"), t);
  CHECK(encode_checkpoint(load_checkpoint(scratch("ck.bin"))) == encode_checkpoint(t));
  CHECK_THROWS(decode_checkpoint("ACPX"));
}
