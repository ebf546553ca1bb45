#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sat/checkpoint.hpp"
#include "test_helpers.hpp"

using namespace sat;
using sat_test::bit_equal;

TEST_SUITE_BEGIN("checkpoint");

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
  const ModelConfig cfg{8, 2, 2, 11, 16};
  Rng rng(12345);
  TransformerParams params = TransformerParams::init(cfg, rng);
  // Exercise signed zero, denormals and extreme exponents.
  params.tok_emb(0, 0) = -0.0;
  params.tok_emb(0, 1) = 5e-324;
  params.tok_emb(0, 2) = -1.7976931348623157e308;

  const std::string path = temp_path("sat_test_roundtrip.sat");
  save_checkpoint(path, params);
  const TransformerParams loaded = load_checkpoint(path);
  CHECK(loaded.cfg.d == cfg.d);
  CHECK(loaded.cfg.vocab == cfg.vocab);
  auto a = params.tensor_refs();
  auto b = loaded.tensor_refs();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    // Bitwise, not just value, equality.
    const auto& x = a[i].tensor->data;
    const auto& y = b[i].tensor->data;
    REQUIRE(x.size() == y.size());
    for (size_t e = 0; e < x.size(); ++e)
      CHECK(std::memcmp(&x[e], &y[e], sizeof(double)) == 0);
  }
  std::remove(path.c_str());
}

TEST_CASE("manifest lists tensors with shapes and offsets in order") {
  const ModelConfig cfg{4, 2, 1, 7, 8};
  Rng rng(5);
  const TransformerParams params = TransformerParams::init(cfg, rng);
  const std::string path = temp_path("sat_test_manifest.sat");
  save_checkpoint(path, params);
  const nlohmann::ordered_json header = checkpoint_manifest(path);
  CHECK(header.at("config").at("d") == 4);
  const auto& tensors = header.at("tensors");
  REQUIRE(tensors.size() == 11);  // 2 emb + 8 layer tensors + final gain
  CHECK(tensors[0].at("name") == "tok_emb");
  CHECK(tensors[0].at("offset") == 0);
  CHECK(tensors[1].at("name") == "pos_emb");
  CHECK(tensors[1].at("offset") == 7 * 4 * 8);
  CHECK(tensors[2].at("shape") == nlohmann::ordered_json({4, 4}));
  // Offsets are cumulative sizes.
  uint64_t expect = 0;
  for (const auto& t : tensors) {
    CHECK(t.at("offset").get<uint64_t>() == expect);
    expect += t.at("shape")[0].get<uint64_t>() * t.at("shape")[1].get<uint64_t>() * 8;
  }
  std::remove(path.c_str());
}

TEST_CASE("corrupt inputs are data errors") {
  const std::string path = temp_path("sat_test_bad.sat");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTACKPT garbage";
  }
  CHECK_THROWS_AS((void)load_checkpoint(path), DataError);
  CHECK_THROWS_AS((void)checkpoint_manifest(path), DataError);
  CHECK_THROWS_AS((void)load_checkpoint(temp_path("sat_no_such_file.sat")), DataError);

  // Truncated tensor data.
  const ModelConfig cfg{4, 2, 1, 7, 8};
  Rng rng(5);
  const TransformerParams params = TransformerParams::init(cfg, rng);
  save_checkpoint(path, params);
  {
    std::error_code ec;
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 64, ec);
    REQUIRE(!ec);
  }
  CHECK_THROWS_AS((void)load_checkpoint(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("non-finite tensor data in a file is a hard error") {
  const ModelConfig cfg{4, 2, 1, 7, 8};
  Rng rng(5);
  TransformerParams params = TransformerParams::init(cfg, rng);
  params.layers[0].w_up(1, 2) = std::numeric_limits<double>::quiet_NaN();
  const std::string path = temp_path("sat_test_nan.sat");
  save_checkpoint(path, params);
  CHECK_THROWS_AS((void)load_checkpoint(path), DataError);
  std::remove(path.c_str());
}

TEST_SUITE_END();
