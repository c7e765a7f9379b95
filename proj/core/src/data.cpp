#include "videoqg/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace videoqg {

namespace fs = std::filesystem;

namespace {

const char* const kSceneWords[] = {
    "kitchen", "garage", "office", "garden", "beach", "library", "station", "market",
    "rooftop", "basement", "hallway", "studio", "cafeteria", "balcony", "workshop", "lobby",
};

const char* const kActionWords[] = {
    "cooking", "reading", "dancing", "painting", "jogging", "singing", "cleaning", "fishing",
    "typing", "jumping", "knitting", "juggling", "stretching", "whistling", "gardening",
    "sketching", "packing", "ironing", "sweeping", "stirring", "hammering", "measuring",
    "folding", "polishing",
};

const char* const kEntityWords[] = {
    "ryan", "monica", "alexis", "sophie", "daniel", "laura", "petra", "nina", "oscar",
    "julia", "victor", "emma", "felix", "clara", "henry", "alice", "martin", "diana",
    "leon", "rosa", "samir", "tina", "walter", "ivy",
};

const char* const kObjectWords[] = {
    "pan", "pot", "stove", "book", "shelf", "lamp", "wrench", "hammer", "engine", "desk",
    "chair", "phone", "net", "rod", "bucket", "broom", "mop", "canvas", "brush", "easel",
    "mixer", "oven", "ladder", "drill", "keyboard", "screen", "printer", "guitar", "drum",
    "microphone", "basket", "rope", "tent", "map", "compass", "kettle", "plate", "scissors",
    "needle", "fabric", "stool", "crate", "toolbox", "notebook", "folder", "monitor",
    "cable", "helmet", "apron", "towel", "sponge", "tray", "jug", "vase", "candle", "clock",
};

const char* const kFillerWords[] = {
    "well", "so", "really", "just", "maybe", "okay", "right", "you", "know", "think",
    "said", "about", "that", "then", "still", "oh", "yes", "no", "sure", "later",
    "today", "tonight", "now", "here", "there", "please", "thanks", "hmm", "anyway",
    "listen", "actually", "honestly", "probably", "again", "soon",
};

// Each template holds exactly one <entity> and one <action> slot.
const char* const kTemplates[] = {
    "what is <entity> doing while <action>",
    "why does <entity> talk about the <action>",
    "where is <entity> during the <action>",
    "how does <entity> react to the <action>",
    "who joins <entity> after the <action>",
};

std::vector<std::string> take_words(const char* const* words, std::size_t available,
                                    std::size_t wanted, const char* what) {
  if (wanted > available) {
    throw DataError(std::string("synthetic task: built-in ") + what + " vocabulary holds " +
                    std::to_string(available) + " entries, " + std::to_string(wanted) +
                    " requested");
  }
  return std::vector<std::string>(words, words + wanted);
}

template <typename T, std::size_t N>
constexpr std::size_t array_len(const T (&)[N]) {
  return N;
}

constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kActionStream = 2;
constexpr std::uint64_t kClipStream = 3;
constexpr std::uint64_t kSplitStream = 4;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Prototypes {
  // proto(s, a) = scene_base[s] + action_signal * action_dir[a]
  std::vector<std::vector<double>> scene_base;
  std::vector<std::vector<double>> action_dir;
};

Prototypes build_prototypes(const SyntheticTaskSpec& spec) {
  Prototypes p;
  for (std::size_t s = 0; s < spec.n_scenes; ++s) {
    std::mt19937_64 rng(derive_seed(spec.rng_seed, kSceneStream, s));
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(spec.frame_dim);
    for (auto& e : v) e = dist(rng);
    p.scene_base.push_back(std::move(v));
  }
  for (std::size_t a = 0; a < spec.n_actions; ++a) {
    std::mt19937_64 rng(derive_seed(spec.rng_seed, kActionStream, a));
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(spec.frame_dim);
    for (auto& e : v) e = dist(rng);
    p.action_dir.push_back(std::move(v));
  }
  return p;
}

std::vector<double> prototype_vector(const SyntheticTaskSpec& spec, const Prototypes& p,
                                     std::size_t scene, std::size_t action) {
  std::vector<double> v(spec.frame_dim);
  for (std::size_t j = 0; j < spec.frame_dim; ++j) {
    v[j] = p.scene_base[scene][j] + spec.action_signal * p.action_dir[action][j];
  }
  return v;
}

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void SyntheticTaskSpec::validate() const {
  if (n_examples == 0) throw ConfigError("synthetic task: n_examples must be > 0");
  if (n_scenes == 0 || n_actions == 0 || n_entities == 0) {
    throw ConfigError("synthetic task: scene/action/entity counts must be > 0");
  }
  if (frame_dim == 0) throw ConfigError("synthetic task: frame_dim must be > 0");
  if (min_frames == 0 || min_frames > max_frames) {
    throw ConfigError("synthetic task: frames-per-clip range is empty");
  }
  if (min_subtitle == 0 || min_subtitle > max_subtitle) {
    throw ConfigError("synthetic task: subtitle length range is empty");
  }
  if (n_templates == 0 || n_templates > array_len(kTemplates)) {
    throw ConfigError("synthetic task: n_templates must be in 1.." +
                      std::to_string(array_len(kTemplates)));
  }
  if (noise_sigma < 0.0) throw ConfigError("synthetic task: noise_sigma must be >= 0");
  if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0) {
    throw ConfigError("synthetic task: split fractions must satisfy train > 0, val >= 0, "
                      "train + val <= 1");
  }
  // trigger vocabulary-size errors early
  scene_names(*this);
  action_names(*this);
  entity_names(*this);
  object_names(*this);
  filler_words(*this);
}

std::vector<std::string> scene_names(const SyntheticTaskSpec& spec) {
  return take_words(kSceneWords, array_len(kSceneWords), spec.n_scenes, "scene");
}

std::vector<std::string> action_names(const SyntheticTaskSpec& spec) {
  return take_words(kActionWords, array_len(kActionWords), spec.n_actions, "action");
}

std::vector<std::string> entity_names(const SyntheticTaskSpec& spec) {
  return take_words(kEntityWords, array_len(kEntityWords), spec.n_entities, "entity");
}

std::vector<std::string> object_names(const SyntheticTaskSpec& spec) {
  const std::size_t wanted = spec.n_scenes * spec.scene_objects +
                             spec.n_actions * spec.action_objects;
  auto names = take_words(kObjectWords, array_len(kObjectWords), wanted, "object");
  names.insert(names.begin(), "<noobj>");
  return names;
}

std::vector<std::string> filler_words(const SyntheticTaskSpec& spec) {
  return take_words(kFillerWords, array_len(kFillerWords), spec.n_fillers, "filler");
}

std::vector<std::vector<std::string>> question_templates(const SyntheticTaskSpec& spec) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t t = 0; t < spec.n_templates; ++t) {
    std::istringstream in(kTemplates[t]);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    out.push_back(std::move(words));
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(root ^ (stream * 0x9e3779b97f4a7c15ULL)) ^ index);
}

std::vector<std::size_t> Dataset::split_indices(const std::string& split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == split) out.push_back(i);
  }
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  if (clips.size() != other.clips.size() || splits != other.splits) return false;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& a = clips[i];
    const auto& b = other.clips[i];
    if (a.clip_id != b.clip_id || a.objects != b.objects || a.subtitle != b.subtitle ||
        a.question != b.question) {
      return false;
    }
    if (a.frames.shape() != b.frames.shape()) return false;
    auto av = a.frames.values();
    auto bv = b.frames.values();
    if (!std::equal(av.begin(), av.end(), bv.begin())) return false;
  }
  if (!(subtitle_vocab == other.subtitle_vocab) || !(question_vocab == other.question_vocab) ||
      object_vocab != other.object_vocab) {
    return false;
  }
  if (has_task != other.has_task) return false;
  if (has_task) {
    return task_spec_to_ini(task).render() == task_spec_to_ini(other.task).render();
  }
  return true;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences, long min_count) {
  std::map<std::string, long> counts;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) ++counts[token];
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  for (const auto& [token, count] : ranked) {
    if (count >= min_count) vocab.add(token);
  }
  return vocab;
}

Dataset generate_synthetic(const SyntheticTaskSpec& spec) {
  spec.validate();
  const auto actions = action_names(spec);
  const auto entities = entity_names(spec);
  const auto fillers = filler_words(spec);
  const auto objects = object_names(spec);
  const auto templates = question_templates(spec);
  const Prototypes protos = build_prototypes(spec);

  struct Draft {
    std::size_t scene, action, entity, tmpl;
    std::size_t n_frames;
    std::vector<std::vector<int>> frame_objects;
    std::vector<double> frame_values;  // row-major, already float-quantized
    std::vector<std::string> subtitle_words;
    std::vector<std::string> question_words;
  };

  // object id layout: 0 = <noobj>, scenes then actions own contiguous ranges
  auto scene_object_id = [&](std::size_t s, std::size_t k) {
    return static_cast<int>(1 + s * spec.scene_objects + k);
  };
  auto action_object_id = [&](std::size_t a, std::size_t k) {
    return static_cast<int>(1 + spec.n_scenes * spec.scene_objects + a * spec.action_objects + k);
  };

  std::vector<Draft> drafts;
  drafts.reserve(spec.n_examples);
  for (std::size_t i = 0; i < spec.n_examples; ++i) {
    std::mt19937_64 rng(derive_seed(spec.rng_seed, kClipStream, i));
    Draft d;
    d.scene = std::uniform_int_distribution<std::size_t>(0, spec.n_scenes - 1)(rng);
    d.action = std::uniform_int_distribution<std::size_t>(0, spec.n_actions - 1)(rng);
    d.entity = std::uniform_int_distribution<std::size_t>(0, spec.n_entities - 1)(rng);
    d.tmpl = std::uniform_int_distribution<std::size_t>(0, templates.size() - 1)(rng);
    d.n_frames =
        std::uniform_int_distribution<std::size_t>(spec.min_frames, spec.max_frames)(rng);

    const std::vector<double> proto = prototype_vector(spec, protos, d.scene, d.action);
    std::normal_distribution<double> noise(0.0, 1.0);
    d.frame_values.resize(d.n_frames * spec.frame_dim);
    for (std::size_t f = 0; f < d.n_frames; ++f) {
      for (std::size_t j = 0; j < spec.frame_dim; ++j) {
        d.frame_values[f * spec.frame_dim + j] =
            quantize_f32(proto[j] + spec.noise_sigma * noise(rng));
      }
    }

    // per-frame objects from the (scene, action) pool
    std::vector<int> pool;
    for (std::size_t k = 0; k < spec.scene_objects; ++k) pool.push_back(scene_object_id(d.scene, k));
    for (std::size_t k = 0; k < spec.action_objects; ++k) {
      pool.push_back(action_object_id(d.action, k));
    }
    bool action_object_seen = false;
    d.frame_objects.resize(d.n_frames);
    for (std::size_t f = 0; f < d.n_frames; ++f) {
      const std::size_t count =
          std::uniform_int_distribution<std::size_t>(0, spec.objects_per_frame_max)(rng);
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pick =
            std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
        d.frame_objects[f].push_back(pool[pick]);
        if (pick >= spec.scene_objects) action_object_seen = true;
      }
    }
    if (!action_object_seen) {
      d.frame_objects[0].push_back(action_object_id(d.action, 0));
    }

    // subtitles: fillers plus the entity mention; never carries the action
    const std::size_t sub_len =
        std::uniform_int_distribution<std::size_t>(spec.min_subtitle, spec.max_subtitle)(rng);
    const std::size_t entity_pos =
        std::uniform_int_distribution<std::size_t>(0, sub_len - 1)(rng);
    for (std::size_t t = 0; t < sub_len; ++t) {
      if (t == entity_pos) {
        d.subtitle_words.push_back(entities[d.entity]);
      } else {
        const std::size_t pick =
            std::uniform_int_distribution<std::size_t>(0, fillers.size() - 1)(rng);
        d.subtitle_words.push_back(fillers[pick]);
      }
    }

    for (const auto& word : templates[d.tmpl]) {
      if (word == "<entity>") {
        d.question_words.push_back(entities[d.entity]);
      } else if (word == "<action>") {
        d.question_words.push_back(actions[d.action]);
      } else {
        d.question_words.push_back(word);
      }
    }
    drafts.push_back(std::move(d));
  }

  Dataset dataset;
  dataset.task = spec;
  dataset.has_task = true;
  dataset.object_vocab = objects;
  {
    std::vector<std::vector<std::string>> sub_corpus, q_corpus;
    for (const auto& d : drafts) {
      sub_corpus.push_back(d.subtitle_words);
      q_corpus.push_back(d.question_words);
    }
    dataset.subtitle_vocab = build_vocab(sub_corpus, 1);
    dataset.question_vocab = build_vocab(q_corpus, 1);
  }

  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const Draft& d = drafts[i];
    MultimodalClip clip;
    char id[32];
    std::snprintf(id, sizeof(id), "clip%05zu", i);
    clip.clip_id = id;
    clip.frames = Tensor::from({d.n_frames, spec.frame_dim}, d.frame_values);
    clip.objects = d.frame_objects;
    for (const auto& w : d.subtitle_words) clip.subtitle.push_back(dataset.subtitle_vocab.lookup(w));
    for (const auto& w : d.question_words) clip.question.push_back(dataset.question_vocab.lookup(w));
    dataset.clips.push_back(std::move(clip));
  }

  // seeded shuffle then contiguous split assignment
  std::vector<std::size_t> order(spec.n_examples);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 split_rng(derive_seed(spec.rng_seed, kSplitStream, 0));
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_frac * static_cast<double>(spec.n_examples)));
  const auto n_val = static_cast<std::size_t>(
      std::llround(spec.val_frac * static_cast<double>(spec.n_examples)));
  dataset.splits.assign(spec.n_examples, "test");
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (rank < n_train) {
      dataset.splits[order[rank]] = "train";
    } else if (rank < n_train + n_val) {
      dataset.splits[order[rank]] = "val";
    }
  }
  return dataset;
}

void filter_short_clips(Dataset& dataset, std::size_t min_frames) {
  if (min_frames == 0) return;
  std::vector<MultimodalClip> clips;
  std::vector<std::string> splits;
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    if (dataset.clips[i].n_frames() >= min_frames) {
      clips.push_back(std::move(dataset.clips[i]));
      splits.push_back(dataset.splits[i]);
    }
  }
  dataset.clips = std::move(clips);
  dataset.splits = std::move(splits);
}

// --- binary tensor records ---------------------------------------------------

namespace {

constexpr char kFramesMagic[4] = {'S', 'R', 'C', 'M'};
constexpr std::uint16_t kFramesVersion = 1;
constexpr const char* kManifestHeader = "videoqg-manifest\tv1";

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint32_t crc32_of(const std::string& bytes, std::size_t start, std::size_t len) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data() + start),
              static_cast<uInt>(len)));
}

// record: rank u8, dims u32 each, payload f32 each, crc32 u32 over the
// preceding record bytes
std::string encode_tensor_record(const Tensor& t) {
  std::string out;
  out.push_back(static_cast<char>(t.rank()));
  for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : t.values()) put_f32(out, static_cast<float>(v));
  const std::uint32_t crc = crc32_of(out, 0, out.size());
  put_u32(out, crc);
  return out;
}

Tensor decode_tensor_record(const std::string& bytes, std::size_t offset, std::size_t length,
                            const std::string& what) {
  if (offset + length > bytes.size()) {
    throw TruncatedFileError(what + ": record [" + std::to_string(offset) + ", +" +
                             std::to_string(length) + ") exceeds file size " +
                             std::to_string(bytes.size()));
  }
  if (length < 5) throw TruncatedFileError(what + ": record too short");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  const std::size_t rank = p[0];
  const std::size_t header = 1 + rank * 4;
  if (length < header + 4) throw TruncatedFileError(what + ": record header exceeds length");
  Shape shape(rank);
  std::size_t numel = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    shape[i] = get_u32(p + 1 + i * 4);
    numel *= shape[i];
  }
  const std::size_t expected = header + numel * 4 + 4;
  if (length != expected) {
    throw TruncatedFileError(what + ": record length " + std::to_string(length) +
                             " does not match shape " + shape_str(shape));
  }
  const std::uint32_t stored = get_u32(p + length - 4);
  const std::uint32_t actual = crc32_of(bytes, offset, length - 4);
  if (stored != actual) {
    throw ChecksumError(what + ": record at offset " + std::to_string(offset) +
                        " fails CRC32 (stored " + std::to_string(stored) + ", computed " +
                        std::to_string(actual) + ")");
  }
  std::vector<double> values(numel);
  for (std::size_t i = 0; i < numel; ++i) {
    const std::uint32_t bits = get_u32(p + header + i * 4);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    values[i] = static_cast<double>(f);
  }
  return Tensor::from(shape, std::move(values));
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(sep);
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> split_ints(const std::string& s, char sep, const std::string& what) {
  std::vector<int> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(sep, start);
    const std::string piece =
        s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (piece.empty()) throw DataError(what + ": empty integer field");
    out.push_back(static_cast<int>(parse_long(piece, what)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    out.push_back(s.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& line : lines) out << line << '\n';
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

void write_dataset(const Dataset& dataset, const std::string& dir) {
  if (dataset.clips.size() != dataset.splits.size()) {
    throw DataError("write_dataset: clips/splits length mismatch");
  }
  fs::create_directories(dir);
  const fs::path base(dir);

  std::string frames_bytes;
  frames_bytes.append(kFramesMagic, 4);
  put_u16(frames_bytes, kFramesVersion);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  for (const auto& clip : dataset.clips) {
    const std::string record = encode_tensor_record(clip.frames);
    spans.emplace_back(frames_bytes.size(), record.size());
    frames_bytes += record;
  }
  {
    std::ofstream out(base / "frames.bin", std::ios::binary);
    if (!out) throw DataError("cannot write '" + (base / "frames.bin").string() + "'");
    out.write(frames_bytes.data(), static_cast<std::streamsize>(frames_bytes.size()));
  }

  // manifest: clip_id, split, offset, length, objects (frames ';', ids ','),
  // subtitle ids, question ids
  std::vector<std::string> lines;
  lines.push_back(kManifestHeader);
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    const auto& clip = dataset.clips[i];
    if (clip.clip_id.find('\t') != std::string::npos ||
        clip.clip_id.find(';') != std::string::npos) {
      throw DataError("write_dataset: clip id '" + clip.clip_id + "' contains reserved characters");
    }
    std::string objects;
    for (std::size_t f = 0; f < clip.objects.size(); ++f) {
      if (f) objects.push_back(';');
      objects += join_ints(clip.objects[f], ',');
    }
    std::ostringstream line;
    line << clip.clip_id << '\t' << dataset.splits[i] << '\t' << spans[i].first << '\t'
         << spans[i].second << '\t' << objects << '\t' << join_ints(clip.subtitle, ',') << '\t'
         << join_ints(clip.question, ',');
    lines.push_back(line.str());
  }
  write_lines(base / "manifest.tsv", lines);

  write_lines(base / "subtitle.vocab", dataset.subtitle_vocab.encode_lines());
  write_lines(base / "question.vocab", dataset.question_vocab.encode_lines());
  write_lines(base / "objects.vocab", dataset.object_vocab);
  if (dataset.has_task) {
    task_spec_to_ini(dataset.task).write_file((base / "task.ini").string());
  }
}

Dataset read_dataset(const std::string& dir) {
  const fs::path base(dir);
  Dataset dataset;

  std::string frames_bytes;
  {
    std::ifstream in(base / "frames.bin", std::ios::binary);
    if (!in) throw DataError("cannot read '" + (base / "frames.bin").string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    frames_bytes = buffer.str();
  }
  if (frames_bytes.size() < 6) throw TruncatedFileError("frames.bin: shorter than its header");
  if (std::memcmp(frames_bytes.data(), kFramesMagic, 4) != 0) {
    throw BadMagicError("frames.bin: expected SRCM");
  }
  const std::uint16_t version =
      get_u16(reinterpret_cast<const unsigned char*>(frames_bytes.data() + 4));
  if (version != kFramesVersion) {
    throw VersionError("frames.bin: version " + std::to_string(version) + ", expected " +
                       std::to_string(kFramesVersion));
  }

  const auto manifest = read_lines(base / "manifest.tsv");
  if (manifest.empty() || manifest[0] != kManifestHeader) {
    throw BadMagicError("manifest.tsv: missing '" + std::string(kManifestHeader) + "' header");
  }
  for (std::size_t n = 1; n < manifest.size(); ++n) {
    if (manifest[n].empty()) continue;
    const auto fields = split_on(manifest[n], '\t');
    if (fields.size() != 7) {
      throw DataError("manifest.tsv:" + std::to_string(n + 1) + ": expected 7 fields, got " +
                      std::to_string(fields.size()));
    }
    MultimodalClip clip;
    clip.clip_id = fields[0];
    const std::string& split = fields[1];
    if (split != "train" && split != "val" && split != "test") {
      throw DataError("manifest.tsv:" + std::to_string(n + 1) + ": unknown split '" + split + "'");
    }
    const auto offset = static_cast<std::size_t>(parse_long(fields[2], "manifest offset"));
    const auto length = static_cast<std::size_t>(parse_long(fields[3], "manifest length"));
    clip.frames = decode_tensor_record(frames_bytes, offset, length, "frames.bin");
    if (clip.frames.rank() != 2) {
      throw DataError("manifest.tsv:" + std::to_string(n + 1) + ": frame tensor is rank " +
                      std::to_string(clip.frames.rank()));
    }
    for (const auto& frame_field : split_on(fields[4], ';')) {
      clip.objects.push_back(split_ints(frame_field, ',', "manifest objects"));
    }
    clip.subtitle = split_ints(fields[5], ',', "manifest subtitle");
    clip.question = split_ints(fields[6], ',', "manifest question");
    dataset.clips.push_back(std::move(clip));
    dataset.splits.push_back(split);
  }

  dataset.subtitle_vocab = Vocabulary::from_lines(read_lines(base / "subtitle.vocab"));
  dataset.question_vocab = Vocabulary::from_lines(read_lines(base / "question.vocab"));
  dataset.object_vocab = read_lines(base / "objects.vocab");
  if (dataset.object_vocab.empty() || dataset.object_vocab[0] != "<noobj>") {
    throw DataError("objects.vocab: id 0 must be <noobj>");
  }
  if (fs::exists(base / "task.ini")) {
    dataset.task = task_spec_from_ini(IniFile::parse_file((base / "task.ini").string()));
    dataset.has_task = true;
  }
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    validate_clip(dataset.clips[i], dataset.object_vocab.size(),
                  static_cast<std::size_t>(dataset.subtitle_vocab.size()),
                  static_cast<std::size_t>(dataset.question_vocab.size()));
  }
  return dataset;
}

IniFile task_spec_to_ini(const SyntheticTaskSpec& spec) {
  IniFile ini;
  auto set_num = [&ini](const char* key, auto value) {
    ini.set("data", key, std::to_string(value));
  };
  set_num("n_examples", spec.n_examples);
  set_num("n_scenes", spec.n_scenes);
  set_num("n_actions", spec.n_actions);
  set_num("n_entities", spec.n_entities);
  set_num("frame_dim", spec.frame_dim);
  set_num("min_frames", spec.min_frames);
  set_num("max_frames", spec.max_frames);
  set_num("objects_per_frame_max", spec.objects_per_frame_max);
  set_num("scene_objects", spec.scene_objects);
  set_num("action_objects", spec.action_objects);
  set_num("n_fillers", spec.n_fillers);
  set_num("min_subtitle", spec.min_subtitle);
  set_num("max_subtitle", spec.max_subtitle);
  set_num("n_templates", spec.n_templates);
  set_num("noise_sigma", spec.noise_sigma);
  set_num("action_signal", spec.action_signal);
  set_num("train_frac", spec.train_frac);
  set_num("val_frac", spec.val_frac);
  set_num("seed", spec.rng_seed);
  return ini;
}

SyntheticTaskSpec task_spec_from_ini(const IniFile& ini) {
  for (const auto& section : ini.section_names()) {
    if (section != "data") {
      throw ConfigError("task spec: unknown section [" + section + "]");
    }
  }
  SyntheticTaskSpec spec;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"n_examples", [&](const std::string& v) { spec.n_examples = static_cast<std::size_t>(parse_long(v, "n_examples")); }},
      {"n_scenes", [&](const std::string& v) { spec.n_scenes = static_cast<std::size_t>(parse_long(v, "n_scenes")); }},
      {"n_actions", [&](const std::string& v) { spec.n_actions = static_cast<std::size_t>(parse_long(v, "n_actions")); }},
      {"n_entities", [&](const std::string& v) { spec.n_entities = static_cast<std::size_t>(parse_long(v, "n_entities")); }},
      {"frame_dim", [&](const std::string& v) { spec.frame_dim = static_cast<std::size_t>(parse_long(v, "frame_dim")); }},
      {"min_frames", [&](const std::string& v) { spec.min_frames = static_cast<std::size_t>(parse_long(v, "min_frames")); }},
      {"max_frames", [&](const std::string& v) { spec.max_frames = static_cast<std::size_t>(parse_long(v, "max_frames")); }},
      {"objects_per_frame_max", [&](const std::string& v) { spec.objects_per_frame_max = static_cast<std::size_t>(parse_long(v, "objects_per_frame_max")); }},
      {"scene_objects", [&](const std::string& v) { spec.scene_objects = static_cast<std::size_t>(parse_long(v, "scene_objects")); }},
      {"action_objects", [&](const std::string& v) { spec.action_objects = static_cast<std::size_t>(parse_long(v, "action_objects")); }},
      {"n_fillers", [&](const std::string& v) { spec.n_fillers = static_cast<std::size_t>(parse_long(v, "n_fillers")); }},
      {"min_subtitle", [&](const std::string& v) { spec.min_subtitle = static_cast<std::size_t>(parse_long(v, "min_subtitle")); }},
      {"max_subtitle", [&](const std::string& v) { spec.max_subtitle = static_cast<std::size_t>(parse_long(v, "max_subtitle")); }},
      {"n_templates", [&](const std::string& v) { spec.n_templates = static_cast<std::size_t>(parse_long(v, "n_templates")); }},
      {"noise_sigma", [&](const std::string& v) { spec.noise_sigma = parse_double(v, "noise_sigma"); }},
      {"action_signal", [&](const std::string& v) { spec.action_signal = parse_double(v, "action_signal"); }},
      {"train_frac", [&](const std::string& v) { spec.train_frac = parse_double(v, "train_frac"); }},
      {"val_frac", [&](const std::string& v) { spec.val_frac = parse_double(v, "val_frac"); }},
      {"seed", [&](const std::string& v) { spec.rng_seed = static_cast<std::uint64_t>(parse_long(v, "seed")); }},
  };
  for (const auto& [key, value] : ini.section("data")) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("task spec: unknown key '" + key + "' in section [data]");
    }
    it->second(value);
  }
  spec.validate();
  return spec;
}

SlotTruth slot_truth(const Dataset& dataset, const MultimodalClip& clip) {
  if (!dataset.has_task) throw DataError("slot_truth: dataset carries no task spec");
  SlotTruth truth;
  const auto entities = entity_names(dataset.task);
  const auto actions = action_names(dataset.task);
  std::unordered_set<std::string> entity_set(entities.begin(), entities.end());
  std::unordered_set<std::string> action_set(actions.begin(), actions.end());
  for (int id : clip.question) {
    const std::string& token = dataset.question_vocab.token(id);
    if (entity_set.count(token)) truth.entity_token = id;
    if (action_set.count(token)) truth.action_token = id;
  }
  return truth;
}

ModalityAudit modality_audit(const Dataset& dataset) {
  if (!dataset.has_task) throw DataError("modality_audit: dataset carries no task spec");
  const SyntheticTaskSpec& spec = dataset.task;
  const Prototypes protos = build_prototypes(spec);
  const auto entities = entity_names(spec);
  const auto actions = action_names(spec);
  std::unordered_map<std::string, std::size_t> entity_index, action_index;
  for (std::size_t i = 0; i < entities.size(); ++i) entity_index[entities[i]] = i;
  for (std::size_t i = 0; i < actions.size(); ++i) action_index[actions[i]] = i;

  auto truth_of = [&](const MultimodalClip& clip) {
    std::pair<int, int> truth{-1, -1};  // (entity idx, action idx)
    for (int id : clip.question) {
      const std::string& token = dataset.question_vocab.token(id);
      auto eit = entity_index.find(token);
      if (eit != entity_index.end()) truth.first = static_cast<int>(eit->second);
      auto ait = action_index.find(token);
      if (ait != action_index.end()) truth.second = static_cast<int>(ait->second);
    }
    return truth;
  };

  auto nearest_cell = [&](const MultimodalClip& clip) {
    std::vector<double> mean(spec.frame_dim, 0.0);
    auto v = clip.frames.values();
    const std::size_t n = clip.n_frames();
    for (std::size_t f = 0; f < n; ++f) {
      for (std::size_t j = 0; j < spec.frame_dim; ++j) mean[j] += v[f * spec.frame_dim + j];
    }
    for (auto& e : mean) e /= static_cast<double>(n);
    std::size_t best_s = 0, best_a = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < spec.n_scenes; ++s) {
      for (std::size_t a = 0; a < spec.n_actions; ++a) {
        const auto proto = prototype_vector(spec, protos, s, a);
        double dist = 0.0;
        for (std::size_t j = 0; j < spec.frame_dim; ++j) {
          const double diff = mean[j] - proto[j];
          dist += diff * diff;
        }
        if (dist < best_dist) {
          best_dist = dist;
          best_s = s;
          best_a = a;
        }
      }
    }
    return std::pair<std::size_t, std::size_t>(best_s, best_a);
  };

  // train-split statistics for the non-informative directions
  std::map<std::pair<std::size_t, std::size_t>, std::vector<long>> cell_entity_counts;
  std::vector<long> action_prior(spec.n_actions, 0);
  for (std::size_t i : dataset.split_indices("train")) {
    const auto truth = truth_of(dataset.clips[i]);
    if (truth.first < 0 || truth.second < 0) continue;
    const auto cell = nearest_cell(dataset.clips[i]);
    auto& counts = cell_entity_counts[cell];
    counts.resize(spec.n_entities, 0);
    ++counts[static_cast<std::size_t>(truth.first)];
    ++action_prior[static_cast<std::size_t>(truth.second)];
  }
  const std::size_t majority_action = static_cast<std::size_t>(
      std::max_element(action_prior.begin(), action_prior.end()) - action_prior.begin());

  auto eval_split = dataset.split_indices("test");
  if (eval_split.empty()) {
    eval_split.resize(dataset.clips.size());
    for (std::size_t i = 0; i < eval_split.size(); ++i) eval_split[i] = i;
  }
  ModalityAudit audit;
  std::size_t counted = 0;
  for (std::size_t i : eval_split) {
    const MultimodalClip& clip = dataset.clips[i];
    const auto truth = truth_of(clip);
    if (truth.first < 0 || truth.second < 0) continue;
    ++counted;
    const auto cell = nearest_cell(clip);
    if (cell.second == static_cast<std::size_t>(truth.second)) audit.frames_action_acc += 1.0;
    std::size_t entity_guess = 0;
    auto it = cell_entity_counts.find(cell);
    if (it != cell_entity_counts.end()) {
      entity_guess = static_cast<std::size_t>(
          std::max_element(it->second.begin(), it->second.end()) - it->second.begin());
    }
    if (entity_guess == static_cast<std::size_t>(truth.first)) audit.frames_entity_acc += 1.0;
    int sub_entity = -1;
    for (int id : clip.subtitle) {
      auto eit = entity_index.find(dataset.subtitle_vocab.token(id));
      if (eit != entity_index.end()) sub_entity = static_cast<int>(eit->second);
    }
    if (sub_entity == truth.first) audit.subtitle_entity_acc += 1.0;
    if (majority_action == static_cast<std::size_t>(truth.second)) {
      audit.subtitle_action_acc += 1.0;
    }
  }
  if (counted) {
    const double n = static_cast<double>(counted);
    audit.frames_action_acc /= n;
    audit.frames_entity_acc /= n;
    audit.subtitle_entity_acc /= n;
    audit.subtitle_action_acc /= n;
  }
  return audit;
}

}  // namespace videoqg
