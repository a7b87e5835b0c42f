// Binary model file, little-endian:
//
//   "GLIDMODL"  u32 version
//   FeatureConfig: u64 min_count, u64 min_count_label, u32 word_ngrams,
//                  u32 bucket, u32 minn, u32 maxn
//   TrainConfig:   u32 dim, u32 epochs, f64 lr, u8 loss, f64 inv_temperature,
//                  u64 seed
//   labels: u64 count, then (u32 length, UTF-8 bytes) each
//   words:  u64 count, then (u32 length, UTF-8 bytes, u64 frequency) each
//   input matrix:  u64 rows, u64 cols, f32 row-major
//   output matrix: u64 rows, u64 cols, f32 row-major
//   u32 CRC32 of every preceding byte

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>

#include "lidkit/errors.hpp"
#include "lidkit/model.hpp"

namespace lidkit {
namespace {

constexpr std::string_view kMagic = "GLIDMODL";

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.append(s); }

  template <typename T>
  void uint(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
    }
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  void matrix(const Matrix<float>& m) {
    uint(static_cast<std::uint64_t>(m.rows()));
    uint(static_cast<std::uint64_t>(m.cols()));
    buf_.reserve(buf_.size() + m.data().size() * 4 + 8);
    for (float v : m.data()) f32(v);
  }

  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(size_t n) {
    if (data_.size() - pos_ < n) throw CorruptModel("model file truncated");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T uint() {
    const auto raw = bytes(sizeof(T));
    std::uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
    }
    return static_cast<T>(v);
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    const auto n = uint<std::uint32_t>();
    return std::string(bytes(n));
  }

  // Counts come from the file; refuse ones that cannot fit in what is left
  // before allocating for them.
  std::uint64_t count(size_t min_bytes_each) {
    const auto n = uint<std::uint64_t>();
    if (min_bytes_each > 0 && n > remaining() / min_bytes_each) {
      throw CorruptModel("model file truncated");
    }
    return n;
  }

  Matrix<float> matrix() {
    const auto rows = uint<std::uint64_t>();
    const auto cols = uint<std::uint64_t>();
    if (cols != 0 && rows > remaining() / 4 / cols) throw CorruptModel("model file truncated");
    Matrix<float> m(rows, cols);
    for (float& v : m.data()) v = f32();
    return m;
  }

  size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr size_t kChunk = 1u << 30;
  for (size_t off = 0; off < bytes.size(); off += kChunk) {
    const size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void write_model(std::ostream& out, const LidModel& model) {
  ByteWriter w;
  w.bytes(kMagic);
  w.uint(kModelFormatVersion);

  const FeatureConfig& f = model.feature_config();
  w.uint(f.min_count);
  w.uint(f.min_count_label);
  w.uint(f.word_ngrams);
  w.uint(f.bucket);
  w.uint(f.minn);
  w.uint(f.maxn);

  const TrainConfig& t = model.train_config();
  w.uint(t.dim);
  w.uint(t.epochs);
  w.f64(t.lr);
  w.uint(static_cast<std::uint8_t>(t.loss));
  w.f64(t.inv_temperature);
  w.uint(t.seed);

  w.uint(static_cast<std::uint64_t>(model.labels().size()));
  for (const auto& label : model.labels()) w.str(label);
  w.uint(static_cast<std::uint64_t>(model.vocab().word_count()));
  for (const auto& entry : model.vocab().words()) {
    w.str(entry.word);
    w.uint(entry.count);
  }
  w.matrix(model.input());
  w.matrix(model.output());
  w.uint(crc32_of(w.buffer()));

  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("failed writing model");
}

LidModel read_model(std::istream& in) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("failed reading model");

  if (data.size() < kMagic.size()) {
    if (kMagic.starts_with(data)) throw CorruptModel("model file truncated");
    throw UnsupportedFormat("not a model file (bad magic)");
  }
  if (std::string_view(data).substr(0, kMagic.size()) != kMagic) {
    throw UnsupportedFormat("not a model file (bad magic)");
  }
  ByteReader header(std::string_view(data).substr(kMagic.size()));
  const auto version = header.uint<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw UnsupportedFormat("unsupported model format version " + std::to_string(version));
  }

  if (data.size() < kMagic.size() + 8) throw CorruptModel("model file truncated");
  const std::string_view body = std::string_view(data).substr(0, data.size() - 4);
  ByteReader trailer(std::string_view(data).substr(data.size() - 4));
  if (trailer.uint<std::uint32_t>() != crc32_of(body)) {
    throw CorruptModel("model checksum mismatch (truncated or damaged file)");
  }

  ByteReader r(body.substr(kMagic.size() + 4));
  FeatureConfig f;
  f.min_count = r.uint<std::uint64_t>();
  f.min_count_label = r.uint<std::uint64_t>();
  f.word_ngrams = r.uint<std::uint32_t>();
  f.bucket = r.uint<std::uint32_t>();
  f.minn = r.uint<std::uint32_t>();
  f.maxn = r.uint<std::uint32_t>();

  TrainConfig t;
  t.dim = r.uint<std::uint32_t>();
  t.epochs = r.uint<std::uint32_t>();
  t.lr = r.f64();
  const auto loss = r.uint<std::uint8_t>();
  if (loss != static_cast<std::uint8_t>(Loss::Softmax)) {
    throw UnsupportedFormat("unsupported loss id " + std::to_string(loss));
  }
  t.loss = Loss::Softmax;
  t.inv_temperature = r.f64();
  t.seed = r.uint<std::uint64_t>();

  std::vector<Label> labels(r.count(4));
  for (auto& label : labels) label = r.str();
  std::vector<VocabEntry> words(r.count(12));
  for (auto& entry : words) {
    entry.word = r.str();
    entry.count = r.uint<std::uint64_t>();
  }
  Matrix<float> input = r.matrix();
  Matrix<float> output = r.matrix();
  if (r.remaining() != 0) throw CorruptModel("trailing bytes after output matrix");

  try {
    return LidModel(Vocabulary(std::move(words), std::move(labels)), f, t, std::move(input),
                    std::move(output));
  } catch (const ValidationError& e) {
    throw CorruptModel(std::string("inconsistent model file: ") + e.what());
  } catch (const NoLabels&) {
    throw CorruptModel("model file has no labels");
  }
}

void save_model(const LidModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model: " + path);
  write_model(out, model);
  out.close();
  if (!out) throw IoError("failed writing model: " + path);
}

LidModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model: " + path);
  return read_model(in);
}

}  // namespace lidkit
