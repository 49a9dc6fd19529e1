#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "photocari/data_pipeline.hpp"
#include "photocari/errors.hpp"
#include "support.hpp"

using namespace photocari;
using photocari::testing::TempDir;
namespace fs = std::filesystem;

namespace {

RgbImage constant_image(int h, int w, std::uint8_t v) {
  RgbImage img;
  img.height = h;
  img.width = w;
  img.pixels.assign(static_cast<std::size_t>(h * w * 3), v);
  return img;
}

// Half-pixel bilinear resampling written out by hand, no antialiasing.
double bilinear_oracle(const RgbImage& img, int64_t out_size, int64_t r, int64_t c, int ch) {
  auto src = [](int64_t i, int64_t in, int64_t out) {
    double s = (i + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
    return std::max(s, 0.0);
  };
  const double sr = src(r, img.height, out_size);
  const double sc = src(c, img.width, out_size);
  const int64_t r0 = static_cast<int64_t>(std::floor(sr));
  const int64_t c0 = static_cast<int64_t>(std::floor(sc));
  const int64_t r1 = std::min(r0 + 1, img.height - 1);
  const int64_t c1 = std::min(c0 + 1, img.width - 1);
  const double fr = sr - r0;
  const double fc = sc - c0;
  const double top = (1 - fc) * img.at(r0, c0, ch) + fc * img.at(r0, c1, ch);
  const double bot = (1 - fc) * img.at(r1, c0, ch) + fc * img.at(r1, c1, ch);
  return (1 - fr) * top + fr * bot;
}

}  // namespace

TEST_SUITE("data_pipeline") {
  TEST_CASE("load_corpus counts images per domain in file-name order") {
    TempDir dir;
    testing::write_corpus(dir.path(), 2, 3, 32);
    auto index = load_corpus(dir.path());
    CHECK(index.photo_paths.size() == 2);
    CHECK(index.caricature_paths.size() == 3);
    CHECK(index.skipped.empty());
    CHECK(std::is_sorted(index.caricature_paths.begin(), index.caricature_paths.end(),
                         [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); }));
    for (const auto& p : index.photo_paths) {
      CHECK(std::find(index.caricature_paths.begin(), index.caricature_paths.end(), p) ==
            index.caricature_paths.end());
    }
  }

  TEST_CASE("missing or empty domain directory") {
    TempDir dir;
    testing::write_corpus(dir.path(), 2, 0, 32);
    fs::remove_all(dir / "caricatures");
    CHECK_THROWS_AS(load_corpus(dir.path()), MissingDomainDir);
    fs::create_directories(dir / "caricatures");
    CHECK_THROWS_AS(load_corpus(dir.path()), MissingDomainDir);
    CHECK_THROWS_AS(load_corpus(dir / "nowhere"), MissingDomainDir);
  }

  TEST_CASE("a truncated file is skipped") {
    TempDir dir;
    testing::write_corpus(dir.path(), 3, 2, 32);
    const auto victim = dir / "photos" / "p01.png";
    fs::resize_file(victim, 20);
    auto index = load_corpus(dir.path());
    CHECK(index.photo_paths.size() == 2);
    CHECK(index.caricature_paths.size() == 2);
    REQUIRE(index.skipped.size() == 1);
    CHECK(index.skipped[0] == victim);
  }

  TEST_CASE("a domain emptied by corrupt files is an error") {
    TempDir dir;
    testing::write_corpus(dir.path(), 1, 2, 32);
    std::ofstream(dir / "photos" / "p00.png", std::ios::trunc) << "not a png";
    CHECK_THROWS_AS(load_corpus(dir.path()), MissingDomainDir);
  }

  TEST_CASE("hidden files are ignored") {
    TempDir dir;
    testing::write_corpus(dir.path(), 2, 2, 32);
    std::ofstream(dir / "photos" / ".DS_Store") << "junk";
    auto index = load_corpus(dir.path());
    CHECK(index.photo_paths.size() == 2);
    CHECK(index.skipped.empty());
  }

  TEST_CASE("preprocess maps the 8-bit endpoints to -1 and +1") {
    auto lo = preprocess(constant_image(40, 40, 0), 32);
    auto hi = preprocess(constant_image(40, 40, 255), 32);
    CHECK(lo.data.sizes() == torch::IntArrayRef{1, 3, 32, 32});
    CHECK(lo.data.eq(-1.0).all().item<bool>());
    CHECK(hi.data.eq(1.0).all().item<bool>());
  }

  TEST_CASE("preprocess resampling matches a hand-written bilinear oracle") {
    RgbImage img;
    img.height = img.width = 512;
    img.pixels.resize(512 * 512 * 3);
    for (int r = 0; r < 512; ++r) {
      for (int c = 0; c < 512; ++c) {
        img.at(r, c, 0) = static_cast<std::uint8_t>(c / 2);
        img.at(r, c, 1) = static_cast<std::uint8_t>(r / 2);
        img.at(r, c, 2) = static_cast<std::uint8_t>((r + c) / 4);
      }
    }
    auto out = preprocess(img, 256).data.to(torch::kFloat64);
    CHECK(out.sizes() == torch::IntArrayRef{1, 3, 256, 256});
    auto acc = out.accessor<double, 4>();
    double worst = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      for (int r = 0; r < 256; ++r) {
        for (int c = 0; c < 256; ++c) {
          const double expect = bilinear_oracle(img, 256, r, c, ch) / 127.5 - 1.0;
          worst = std::max(worst, std::abs(acc[0][ch][r][c] - expect));
        }
      }
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("preprocess upsampling also matches the oracle") {
    auto img = testing::synthetic_photo(24, 3);
    auto out = preprocess(img, 40).data.to(torch::kFloat64);
    auto acc = out.accessor<double, 4>();
    double worst = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      for (int r = 0; r < 40; ++r) {
        for (int c = 0; c < 40; ++c) {
          worst = std::max(worst, std::abs(acc[0][ch][r][c] - (bilinear_oracle(img, 40, r, c, ch) / 127.5 - 1.0)));
        }
      }
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("preprocess rejects odd or tiny sizes") {
    auto img = constant_image(32, 32, 10);
    CHECK_THROWS_AS(preprocess(img, 15), BadSize);
    CHECK_THROWS_AS(preprocess(img, 17), BadSize);
    CHECK_THROWS_AS(preprocess(img, 14), BadSize);
    CHECK_NOTHROW(preprocess(img, 16));
  }

  TEST_CASE("preprocess is idempotent on already-sized inputs") {
    auto img = testing::synthetic_caricature(48, 5);
    auto once = preprocess(img, 48);
    auto direct = torch::from_blob(img.pixels.data(), {48, 48, 3}, torch::kUInt8)
                      .permute({2, 0, 1})
                      .to(torch::kFloat64)
                      .div(127.5)
                      .sub(1.0)
                      .unsqueeze(0);
    CHECK((once.data.to(torch::kFloat64) - direct).abs().max().item<double>() < 1e-6);
    auto twice = preprocess(to_rgb8(once.data[0]), 48);
    CHECK((twice.data - once.data).abs().max().item<double>() < 1e-6);
  }

  TEST_CASE("8-bit round trip through tensors is lossless") {
    RgbImage img;
    img.height = 16;
    img.width = 16;
    img.pixels.resize(16 * 16 * 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] = static_cast<std::uint8_t>(i % 256);
    }
    auto back = to_rgb8(preprocess(img, 16).data[0]);
    CHECK(back.pixels == img.pixels);
  }

  TEST_CASE("sample_batch is deterministic, shaped and domain-tagged") {
    TempDir dir;
    testing::write_corpus(dir.path(), 2, 3, 32);
    auto index = load_corpus(dir.path());
    auto a = sample_batch(index, 1, 32, 99);
    auto b = sample_batch(index, 1, 32, 99);
    CHECK(torch::equal(a.photo.data, b.photo.data));
    CHECK(torch::equal(a.caricature.data, b.caricature.data));
    CHECK(a.photo_ids == b.photo_ids);

    auto c = sample_batch(index, 4, 32, 5);
    CHECK(c.photo.data.sizes() == torch::IntArrayRef{4, 3, 32, 32});
    CHECK(c.caricature.data.sizes() == torch::IntArrayRef{4, 3, 32, 32});
    CHECK(c.photo.domain == Domain::Photo);
    CHECK(c.caricature.domain == Domain::Caricature);

    // Each row is the preprocessed image of its recorded source file.
    ImageBank bank(index, 32);
    for (int i = 0; i < 4; ++i) {
      CHECK(torch::equal(c.photo.data[i], bank.image(Domain::Photo, c.photo_ids[i])[0]));
      CHECK(torch::equal(c.caricature.data[i], bank.image(Domain::Caricature, c.caricature_ids[i])[0]));
    }
  }

  TEST_CASE("sample_batch draws uniformly with replacement") {
    TempDir dir;
    testing::write_corpus(dir.path(), 2, 3, 16);
    auto index = load_corpus(dir.path());
    const int n = 10000;
    auto batch = sample_batch(index, n, 16, 2024);
    std::map<int64_t, int> photo, cari;
    for (int i = 0; i < n; ++i) {
      ++photo[batch.photo_ids[i]];
      ++cari[batch.caricature_ids[i]];
    }
    const double sigma = std::sqrt(0.25 / n);
    CHECK(std::abs(photo[0] / double(n) - 0.5) < 3 * sigma);
    CHECK(std::abs(photo[1] / double(n) - 0.5) < 3 * sigma);
    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double e = n / 3.0;
      chi2 += (cari[k] - e) * (cari[k] - e) / e;
    }
    CHECK(chi2 < 13.82);  // df = 2, p = 0.001
  }

  TEST_CASE("split_holdout reserves the tail of each domain") {
    TempDir dir;
    testing::write_corpus(dir.path(), 4, 3, 16);
    auto index = load_corpus(dir.path());
    auto [train, eval] = split_holdout(index, 1);
    CHECK(train.photo_paths.size() == 3);
    CHECK(train.caricature_paths.size() == 2);
    CHECK(eval.photo_paths.size() == 1);
    CHECK(eval.photo_paths[0] == index.photo_paths.back());
    CHECK_THROWS_AS(split_holdout(index, 3), MissingDomainDir);
  }
}
