#include "vdep/checkpoint.hpp"

#include <cstring>

#include <json.hpp>

#include "vdep/common.hpp"
#include "vdep/fileio.hpp"

using nlohmann::json;

namespace vdep {

namespace {

constexpr char kMagic[8] = {'V', 'D', 'E', 'P', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(json header) {
    buf_.append(kMagic, sizeof(kMagic));
    append_u32(kVersion);
    const std::string h = header.dump();
    append_u32(static_cast<uint32_t>(h.size()));
    buf_ += h;
  }

  template <typename M>
  void tensor(const M& m) {
    append_u64(static_cast<uint64_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const float v = m.data()[i];
      buf_.append(reinterpret_cast<const char*>(&v), sizeof(float));
    }
  }

  void save(const std::string& path) { write_text_atomic(path, buf_); }

 private:
  void append_u32(uint32_t v) { buf_.append(reinterpret_cast<const char*>(&v), 4); }
  void append_u64(uint64_t v) { buf_.append(reinterpret_cast<const char*>(&v), 8); }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), buf_(read_text_file(path)) {
    if (buf_.size() < sizeof(kMagic) + 8 ||
        std::memcmp(buf_.data(), kMagic, sizeof(kMagic)) != 0) {
      fail("{}: not a model checkpoint", path_);
    }
    pos_ = sizeof(kMagic);
    const uint32_t version = u32();
    if (version != kVersion) fail("{}: unsupported checkpoint version {}", path_, version);
    const uint32_t hlen = u32();
    need(hlen);
    try {
      header_ = json::parse(buf_.substr(pos_, hlen));
    } catch (const std::exception& e) {
      fail("{}: bad checkpoint header: {}", path_, e.what());
    }
    pos_ += hlen;
  }

  const json& header() const { return header_; }

  template <typename M>
  void tensor(M& m) {
    const uint64_t n = u64();
    if (static_cast<uint64_t>(m.size()) != n) {
      fail("{}: tensor size {} does not match expected {}", path_, n, m.size());
    }
    need(n * sizeof(float));
    std::memcpy(m.data(), buf_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
  }

 private:
  void need(size_t bytes) {
    if (pos_ + bytes > buf_.size()) fail("{}: truncated checkpoint", path_);
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }
  std::string path_;
  std::string buf_;
  size_t pos_ = 0;
  json header_;
};

template <typename F>
void each_cnn_tensor(CnnModelF& model, F&& f) {
  for (auto* blk : {&model.block1, &model.block2, &model.block3, &model.block4}) {
    f(blk->conv.weight);
    f(blk->conv.bias);
    f(blk->bn.gamma);
    f(blk->bn.beta);
    f(blk->bn.running_mean);
    f(blk->bn.running_var);
  }
  f(model.conv5.weight);
  f(model.conv5.bias);
}

}  // namespace

void save_cnn_checkpoint(const CnnModelF& model, const std::string& path) {
  json header;
  header["type"] = "cnn";
  header["seed"] = model.seed;
  header["layers"] = {{"blocks", 4},
                      {"filters", 64},
                      {"classes", kNumVowelClasses},
                      {"input", {1, kNumMels, kPatchFrames}}};
  Writer w(header);
  each_cnn_tensor(const_cast<CnnModelF&>(model), [&w](auto& t) { w.tensor(t); });
  w.save(path);
}

CnnModelF load_cnn_checkpoint(const std::string& path) {
  Reader r(path);
  if (r.header().value("type", "") != "cnn") fail("{}: not a CNN checkpoint", path);
  CnnModelF model;
  model.seed = r.header().value("seed", uint64_t{0});
  each_cnn_tensor(model, [&r](auto& t) { r.tensor(t); });
  return model;
}

void save_lstm_checkpoint(const LstmModelF& model, EmbeddingKind kind,
                          const std::string& path) {
  json header;
  header["type"] = "lstm";
  header["seed"] = model.seed;
  header["kind"] = to_string(kind);
  header["input_dim"] = model.cell.input_dim;
  header["hidden_dim"] = model.cell.hidden_dim;
  header["classes"] = kDepClasses;
  Writer w(header);
  w.tensor(model.cell.wx);
  w.tensor(model.cell.wh);
  w.tensor(model.cell.b);
  w.tensor(model.fc.weight);
  w.tensor(model.fc.bias);
  w.save(path);
}

LstmModelF load_lstm_checkpoint(const std::string& path, EmbeddingKind* kind) {
  Reader r(path);
  if (r.header().value("type", "") != "lstm") fail("{}: not an LSTM checkpoint", path);
  const int input_dim = r.header().value("input_dim", 0);
  const int hidden_dim = r.header().value("hidden_dim", 0);
  if (hidden_dim != kLstmHiddenDim) {
    fail("{}: hidden dim {} != {}", path, hidden_dim, kLstmHiddenDim);
  }
  LstmModelF model;
  model.seed = r.header().value("seed", uint64_t{0});
  model.cell = nn::LstmCell<float>(input_dim, hidden_dim);
  model.fc = nn::Linear<float>(hidden_dim, kDepClasses);
  r.tensor(model.cell.wx);
  r.tensor(model.cell.wh);
  r.tensor(model.cell.b);
  r.tensor(model.fc.weight);
  r.tensor(model.fc.bias);
  if (kind) *kind = embedding_kind_from_string(r.header().value("kind", "conv5"));
  return model;
}

}  // namespace vdep
