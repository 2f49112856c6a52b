#include "fusionkit/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fusionkit/error.hpp"

namespace fusionkit {

namespace {

constexpr char kMagic[8] = {'F', 'K', 'M', 'O', 'D', 'E', 'L', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string str(std::size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(Errc::Parse, "model blob is truncated");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

// Guards against absurd sizes from corrupted headers before allocating.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, static_cast<std::uint64_t>(model.kind));
  put_u64(out, model.feature_count);
  put_u64(out, model.class_names.size());
  for (const std::string& name : model.class_names) {
    put_u64(out, name.size());
    out += name;
  }
  put_u64(out, model.validation_accuracy.has_value() ? 1 : 0);
  put_f64(out, model.validation_accuracy.value_or(0.0));
  put_u64(out, model.parameters.size());
  for (const Matrix& m : model.parameters) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
  }
  return out;
}

TrainedModel deserialize_model(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(Errc::Parse, "not a model file (missing FKMODEL1 header)");
  }
  Reader in(bytes);
  in.str(sizeof(kMagic));

  TrainedModel model;
  const std::uint64_t kind = in.u64();
  if (kind > static_cast<std::uint64_t>(ModelKind::Mlp)) throw Error(Errc::Parse, "unknown model kind in blob");
  model.kind = static_cast<ModelKind>(kind);
  model.feature_count = in.u64();
  const std::uint64_t classes = in.u64();
  if (classes > kMaxCount) throw Error(Errc::Parse, "corrupt class count in model blob");
  for (std::uint64_t k = 0; k < classes; ++k) model.class_names.push_back(in.str(in.u64()));
  const bool has_validation = in.u64() != 0;
  const double validation = in.f64();
  if (has_validation) model.validation_accuracy = validation;
  const std::uint64_t count = in.u64();
  if (count > 16) throw Error(Errc::Parse, "corrupt parameter count in model blob");
  for (std::uint64_t p = 0; p < count; ++p) {
    const std::uint64_t rows = in.u64();
    const std::uint64_t cols = in.u64();
    if (rows > kMaxCount || cols > kMaxCount || rows * cols > bytes.size()) {
      throw Error(Errc::Parse, "corrupt parameter shape in model blob");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = in.f64();
    model.parameters.push_back(std::move(m));
  }
  if (!in.done()) throw Error(Errc::Parse, "trailing bytes after model blob");
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
  const std::string blob = serialize_model(model);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error(Errc::Io, "failed writing '" + path.string() + "'");
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace fusionkit
