#include "videoqg/checkpoint.hpp"

#include <json.hpp>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>

namespace videoqg {

using nlohmann::json;

std::unique_ptr<QgModel> build_model(const ModelSpec& spec) {
  if (spec.kind == "srcmsa") {
    return std::make_unique<SrcmsaModel>(spec.srcmsa, spec.vocabs, spec.init_seed);
  }
  if (spec.kind == "s2vt") {
    BaselineConfig cfg = spec.baseline;
    cfg.kind = BaselineConfig::Kind::kS2vt;
    return std::make_unique<S2vtModel>(cfg, spec.vocabs, spec.init_seed);
  }
  if (spec.kind == "imgd") {
    BaselineConfig cfg = spec.baseline;
    cfg.kind = BaselineConfig::Kind::kImgd;
    return std::make_unique<ImgdModel>(cfg, spec.vocabs, spec.init_seed);
  }
  throw ConfigError("unknown model kind '" + spec.kind + "' (expected srcmsa, s2vt or imgd)");
}

namespace {

json spec_to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = spec.kind;
  j["init_seed"] = spec.init_seed;
  j["vocabs"] = {{"object", spec.vocabs.object_vocab},
                 {"subtitle", spec.vocabs.subtitle_vocab},
                 {"question", spec.vocabs.question_vocab}};
  j["srcmsa"] = {{"d_model", spec.srcmsa.encoder.d_model},
                 {"n_heads", spec.srcmsa.encoder.n_heads},
                 {"n_layers", spec.srcmsa.encoder.n_layers},
                 {"ffn_dim", spec.srcmsa.encoder.ffn_dim},
                 {"use_subtitles", spec.srcmsa.encoder.use_subtitles},
                 {"use_sre", spec.srcmsa.encoder.use_sre},
                 {"dropout", spec.srcmsa.encoder.dropout},
                 {"frame_dim", spec.srcmsa.dims.frame_dim},
                 {"embed_dim", spec.srcmsa.dims.embed_dim},
                 {"d_dec", spec.srcmsa.decoder.d_dec},
                 {"dec_layers", spec.srcmsa.decoder.n_layers},
                 {"dec_emb_dim", spec.srcmsa.decoder.emb_dim}};
  j["baseline"] = {{"d_hidden", spec.baseline.d_hidden},
                   {"n_layers", spec.baseline.n_layers},
                   {"emb_dim", spec.baseline.emb_dim},
                   {"frame_dim", spec.baseline.frame_dim}};
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.init_seed = j.at("init_seed").get<std::uint64_t>();
  spec.vocabs.object_vocab = j.at("vocabs").at("object").get<std::size_t>();
  spec.vocabs.subtitle_vocab = j.at("vocabs").at("subtitle").get<std::size_t>();
  spec.vocabs.question_vocab = j.at("vocabs").at("question").get<std::size_t>();
  const json& s = j.at("srcmsa");
  spec.srcmsa.encoder.d_model = s.at("d_model").get<std::size_t>();
  spec.srcmsa.encoder.n_heads = s.at("n_heads").get<std::size_t>();
  spec.srcmsa.encoder.n_layers = s.at("n_layers").get<std::size_t>();
  spec.srcmsa.encoder.ffn_dim = s.at("ffn_dim").get<std::size_t>();
  spec.srcmsa.encoder.use_subtitles = s.at("use_subtitles").get<bool>();
  spec.srcmsa.encoder.use_sre = s.at("use_sre").get<bool>();
  spec.srcmsa.encoder.dropout = s.at("dropout").get<double>();
  spec.srcmsa.dims.frame_dim = s.at("frame_dim").get<std::size_t>();
  spec.srcmsa.dims.embed_dim = s.at("embed_dim").get<std::size_t>();
  spec.srcmsa.decoder.d_dec = s.at("d_dec").get<std::size_t>();
  spec.srcmsa.decoder.n_layers = s.at("dec_layers").get<std::size_t>();
  spec.srcmsa.decoder.emb_dim = s.at("dec_emb_dim").get<std::size_t>();
  const json& b = j.at("baseline");
  spec.baseline.d_hidden = b.at("d_hidden").get<std::size_t>();
  spec.baseline.n_layers = b.at("n_layers").get<std::size_t>();
  spec.baseline.emb_dim = b.at("emb_dim").get<std::size_t>();
  spec.baseline.frame_dim = b.at("frame_dim").get<std::size_t>();
  return spec;
}

constexpr char kMagic[4] = {'V', 'Q', 'G', 'C'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_doubles(std::string& out, const std::vector<double>& values) {
  put_u64(out, values.size());
  const std::size_t bytes = values.size() * sizeof(double);
  const std::size_t at = out.size();
  out.resize(at + bytes);
  std::memcpy(out.data() + at, values.data(), bytes);
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > bytes.size()) {
      throw TruncatedFileError(std::string("checkpoint: ") + what + " at offset " +
                               std::to_string(pos));
    }
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    pos += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    pos += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    pos += 8;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
  std::vector<double> doubles(const char* what) {
    const std::uint64_t n = u64(what);
    need(n * sizeof(double), what);
    std::vector<double> out(n);
    std::memcpy(out.data(), bytes.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return out;
  }
};

}  // namespace

Checkpoint make_checkpoint(const QgModel& model, const ModelSpec& spec,
                           const Optimizer& optimizer, std::size_t step,
                           const std::string& rng_state, const Dataset& dataset) {
  Checkpoint ckpt;
  ckpt.spec = spec;
  ckpt.subtitle_vocab_lines = dataset.subtitle_vocab.encode_lines();
  ckpt.question_vocab_lines = dataset.question_vocab.encode_lines();
  ckpt.object_vocab_lines = dataset.object_vocab;
  ckpt.step = step;
  ckpt.rng_state = rng_state;
  ckpt.optimizer_kind = optimizer_kind_name(optimizer.kind());
  ckpt.optimizer_lr = optimizer.learning_rate();
  ckpt.optimizer_clip = optimizer.clip_norm();
  ckpt.optimizer_t = optimizer.step_count();
  for (const auto& [name, tensor] : model.params().items()) {
    auto v = tensor.values();
    ckpt.params.emplace(name, std::vector<double>(v.begin(), v.end()));
  }
  ckpt.adam_slots = optimizer.slots();
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json header;
  header["spec"] = spec_to_json(ckpt.spec);
  header["vocab"] = {{"subtitle", ckpt.subtitle_vocab_lines},
                     {"question", ckpt.question_vocab_lines},
                     {"objects", ckpt.object_vocab_lines}};
  header["step"] = ckpt.step;
  header["rng"] = ckpt.rng_state;
  header["optimizer"] = {{"kind", ckpt.optimizer_kind},
                         {"lr", ckpt.optimizer_lr},
                         {"clip", ckpt.optimizer_clip},
                         {"t", ckpt.optimizer_t}};
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_u64(out, header_text.size());
  out += header_text;
  put_u64(out, ckpt.params.size());
  for (const auto& [name, values] : ckpt.params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_doubles(out, values);
  }
  put_u64(out, ckpt.adam_slots.size());
  for (const auto& [name, slot] : ckpt.adam_slots) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_doubles(out, slot.m);
    put_doubles(out, slot.v);
  }
  const auto crc = static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size())));
  put_u32(out, crc);

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write checkpoint '" + path + "'");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot read checkpoint '" + path + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string bytes = buffer.str();
  if (bytes.size() < 10) throw TruncatedFileError("checkpoint: shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw BadMagicError("checkpoint: expected VQGC");
  }
  // trailing CRC covers everything before it
  {
    const auto stored = static_cast<std::uint32_t>(
        static_cast<unsigned char>(bytes[bytes.size() - 4]) |
        (static_cast<unsigned char>(bytes[bytes.size() - 3]) << 8) |
        (static_cast<unsigned char>(bytes[bytes.size() - 2]) << 16) |
        (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[bytes.size() - 1])) << 24));
    const auto actual = static_cast<std::uint32_t>(::crc32(
        0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size() - 4)));
    if (stored != actual) throw ChecksumError("checkpoint: file fails CRC32");
  }

  Reader r{bytes, 4};
  const std::uint16_t version = r.u16("version");
  if (version != kVersion) {
    throw VersionError("checkpoint: version " + std::to_string(version) + ", expected " +
                       std::to_string(kVersion));
  }
  const std::uint64_t header_len = r.u64("header length");
  json header;
  try {
    header = json::parse(r.str(header_len, "header"));
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: bad JSON header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.spec = spec_from_json(header.at("spec"));
    ckpt.subtitle_vocab_lines = header.at("vocab").at("subtitle").get<std::vector<std::string>>();
    ckpt.question_vocab_lines = header.at("vocab").at("question").get<std::vector<std::string>>();
    ckpt.object_vocab_lines = header.at("vocab").at("objects").get<std::vector<std::string>>();
    ckpt.step = header.at("step").get<std::size_t>();
    ckpt.rng_state = header.at("rng").get<std::string>();
    ckpt.optimizer_kind = header.at("optimizer").at("kind").get<std::string>();
    ckpt.optimizer_lr = header.at("optimizer").at("lr").get<double>();
    ckpt.optimizer_clip = header.at("optimizer").at("clip").get<double>();
    ckpt.optimizer_t = header.at("optimizer").at("t").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: incomplete header: ") + e.what());
  }

  const std::uint64_t n_params = r.u64("parameter count");
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const std::uint32_t name_len = r.u32("parameter name length");
    const std::string name = r.str(name_len, "parameter name");
    ckpt.params.emplace(name, r.doubles("parameter payload"));
  }
  const std::uint64_t n_slots = r.u64("optimizer slot count");
  for (std::uint64_t i = 0; i < n_slots; ++i) {
    const std::uint32_t name_len = r.u32("slot name length");
    const std::string name = r.str(name_len, "slot name");
    Optimizer::AdamSlot slot;
    slot.m = r.doubles("slot m");
    slot.v = r.doubles("slot v");
    ckpt.adam_slots.emplace(name, std::move(slot));
  }
  return ckpt;
}

std::unique_ptr<QgModel> model_from_checkpoint(const Checkpoint& ckpt) {
  std::unique_ptr<QgModel> model = build_model(ckpt.spec);
  const auto& items = model->params().items();
  if (items.size() != ckpt.params.size()) {
    throw DataError("checkpoint: stores " + std::to_string(ckpt.params.size()) +
                    " parameters, model has " + std::to_string(items.size()));
  }
  for (const auto& [name, tensor] : items) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end()) {
      throw DataError("checkpoint: missing parameter '" + name + "'");
    }
    Tensor handle = tensor;
    auto dst = handle.mutable_values();
    if (it->second.size() != dst.size()) {
      throw DataError("checkpoint: parameter '" + name + "' holds " +
                      std::to_string(it->second.size()) + " values, model expects " +
                      std::to_string(dst.size()));
    }
    std::copy(it->second.begin(), it->second.end(), dst.begin());
  }
  return model;
}

Optimizer optimizer_from_checkpoint(const Checkpoint& ckpt) {
  Optimizer opt(optimizer_kind_from_string(ckpt.optimizer_kind), ckpt.optimizer_lr,
                ckpt.optimizer_clip);
  opt.restore(ckpt.adam_slots, ckpt.optimizer_t);
  return opt;
}

}  // namespace videoqg
