#include "videoqg/vocab.hpp"

namespace videoqg {

Vocabulary::Vocabulary() {
  for (const char* reserved : {"<pad>", "<bos>", "<eos>", "<unk>"}) {
    int id = static_cast<int>(tokens_.size());
    tokens_.emplace_back(reserved);
    ids_.emplace(reserved, id);
  }
}

int Vocabulary::add(const std::string& token) {
  if (ids_.count(token)) throw DataError("vocabulary already contains '" + token + "'");
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw IndexError("vocabulary id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(size()) + ")");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocabulary::encode_lines() const { return tokens_; }

Vocabulary Vocabulary::from_lines(const std::vector<std::string>& lines) {
  Vocabulary v;
  if (lines.size() < 4 || lines[0] != "<pad>" || lines[1] != "<bos>" || lines[2] != "<eos>" ||
      lines[3] != "<unk>") {
    throw DataError("vocabulary file must start with <pad> <bos> <eos> <unk>");
  }
  for (std::size_t i = 4; i < lines.size(); ++i) v.add(lines[i]);
  return v;
}

std::string detokenize(const Vocabulary& vocab, const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(ids[i]);
  }
  return out;
}

}  // namespace videoqg
