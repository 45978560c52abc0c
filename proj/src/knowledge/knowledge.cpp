#include "homesim/knowledge/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "homesim/core/error.hpp"
#include "homesim/runtime/digest.hpp"
#include "homesim/runtime/rng.hpp"

namespace homesim::knowledge {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool by_score_then_id(const ScoredChunk& a, const ScoredChunk& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string chunk_id(const std::string& doc_id, std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "#%04zu", index);
  return doc_id + buf;
}

std::string strip_markdown(const std::string& text, std::optional<std::string>& title) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("```", 0) == 0 || line.rfind("~~~", 0) == 0) continue;
    std::size_t hashes = 0;
    while (hashes < line.size() && line[hashes] == '#') ++hashes;
    if (hashes > 0 && hashes < line.size() && line[hashes] == ' ') {
      line = line.substr(hashes + 1);
      if (!title) title = line;
    }
    // [text](target) keeps only the text.
    std::string kept;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == ']' && i + 1 < line.size() && line[i + 1] == '(') {
        auto close = line.find(')', i + 2);
        if (close != std::string::npos) {
          i = close;
          continue;
        }
      }
      if (line[i] == '[' || line[i] == ']' || line[i] == '*' || line[i] == '`') continue;
      kept += line[i];
    }
    out += kept;
    out += '\n';
  }
  return out;
}

void collect_strings(const nlohmann::json& j, std::string& out) {
  if (j.is_string()) {
    out += j.get<std::string>();
    out += '\n';
  } else if (j.is_number() || j.is_boolean()) {
    out += j.dump();
    out += '\n';
  } else if (j.is_structured()) {
    for (const auto& v : j) collect_strings(v, out);
  }
}

const std::vector<std::string>& adapter_fields(Adapter a) {
  static const std::vector<std::string> academic{"title", "authors", "year", "venue"};
  static const std::vector<std::string> threat{"id", "cve", "technique", "name", "tactic"};
  static const std::vector<std::string> device{"device_type", "type", "protocols", "manufacturer"};
  switch (a) {
    case Adapter::kAcademic:
      return academic;
    case Adapter::kThreat:
      return threat;
    case Adapter::kDevice:
      break;
  }
  return device;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr std::string_view kPostingsHeader = "# homesim-postings v";
constexpr std::string_view kVectorsHeader = "# homesim-vectors v";

int header_version(const std::string& line, std::string_view prefix, const std::string& file) {
  if (line.rfind(prefix, 0) != 0) throw IntegrityError(file, file + " has no format header");
  try {
    return std::stoi(line.substr(prefix.size()));
  } catch (const std::exception&) {
    throw IntegrityError(file, file + " has a malformed format header");
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    } else if ((c == '-' || c == '_') && !cur.empty() && i + 1 < text.size() &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      cur += static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<TokenWindow> chunk_tokens(std::span<const std::string> tokens, std::size_t size,
                                      std::size_t overlap) {
  if (size == 0 || overlap >= size)
    throw ValidationError("chunk overlap must be smaller than the chunk size");
  std::vector<TokenWindow> out;
  const std::size_t stride = size - overlap;
  for (std::size_t start = 0; start < tokens.size(); start += stride) {
    const std::size_t end = std::min(tokens.size(), start + size);
    out.push_back({start, {tokens.begin() + static_cast<std::ptrdiff_t>(start),
                           tokens.begin() + static_cast<std::ptrdiff_t>(end)}});
    if (end == tokens.size()) break;
  }
  return out;
}

std::string_view adapter_name(Adapter a) {
  switch (a) {
    case Adapter::kAcademic:
      return "academic";
    case Adapter::kThreat:
      return "threat";
    case Adapter::kDevice:
      break;
  }
  return "device";
}

Adapter parse_adapter(std::string_view s) {
  if (s == "academic") return Adapter::kAcademic;
  if (s == "threat") return Adapter::kThreat;
  if (s == "device") return Adapter::kDevice;
  throw ValidationError("unknown adapter '" + std::string(s) + "' (academic, threat, device)");
}

std::string_view format_name(DocumentFormat f) {
  switch (f) {
    case DocumentFormat::kText:
      return "text";
    case DocumentFormat::kMarkdown:
      return "markdown";
    case DocumentFormat::kStructured:
      break;
  }
  return "structured";
}

namespace {

DocumentFormat parse_format(std::string_view s) {
  if (s == "text") return DocumentFormat::kText;
  if (s == "markdown") return DocumentFormat::kMarkdown;
  if (s == "structured") return DocumentFormat::kStructured;
  throw ValidationError("unknown document format '" + std::string(s) + "'");
}

}  // namespace

DocumentFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".txt" || ext == ".text") return DocumentFormat::kText;
  if (ext == ".md" || ext == ".markdown") return DocumentFormat::kMarkdown;
  if (ext == ".json") return DocumentFormat::kStructured;
  if (ext == ".pdf")
    throw ValidationError("PDF input needs text extraction first; ingest the extracted .txt");
  throw ValidationError("unsupported document format '" + ext + "' for " + path.string());
}

std::string KnowledgeChunk::text() const { return join(tokens); }

Extracted extract(const Document& doc, Adapter adapter) {
  Extracted out;
  switch (doc.format) {
    case DocumentFormat::kText:
      out.text = doc.content;
      break;
    case DocumentFormat::kMarkdown: {
      std::optional<std::string> title;
      out.text = strip_markdown(doc.content, title);
      if (title) out.metadata["title"] = *title;
      break;
    }
    case DocumentFormat::kStructured: {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(doc.content);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("document '" + doc.id + "' is not valid JSON: " + e.what());
      }
      collect_strings(j, out.text);
      if (j.is_object())
        for (const auto& field : adapter_fields(adapter)) {
          auto it = j.find(field);
          if (it == j.end()) continue;
          out.metadata[field] = it->is_string() ? it->get<std::string>() : it->dump();
        }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

HashingProvider::HashingProvider(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw ValidationError("embedding dimension must be positive");
}

std::string HashingProvider::name() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "hashing-%016llx", static_cast<unsigned long long>(seed_));
  return buf;
}

std::pair<std::size_t, double> HashingProvider::feature_slot(std::string_view feature) const {
  const std::uint64_t h = mix64(fnv1a64(feature) ^ seed_);
  return {static_cast<std::size_t>(h % dimension_), (h >> 63) ? -1.0 : 1.0};
}

std::vector<double> HashingProvider::embed_one(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    ++counts["1:" + tokens[i]];
    if (i + 1 < tokens.size()) ++counts["2:" + tokens[i] + " " + tokens[i + 1]];
  }
  std::vector<double> v(dimension_, 0.0);
  for (const auto& [feature, n] : counts) {
    const auto [i, sign] = feature_slot(feature);
    v[i] += sign * (1.0 + std::log(static_cast<double>(n)));
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<std::vector<double>> HashingProvider::embed(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double bm25_idf(std::size_t n_chunks, std::size_t n_containing) {
  const double n = static_cast<double>(n_containing);
  return std::log((static_cast<double>(n_chunks) - n + 0.5) / (n + 0.5) + 1.0);
}

void validate(const FusionConfig& c) {
  if (!(c.w_sem >= 0.0) || !(c.w_kw >= 0.0)) throw ValidationError("fusion weights must be non-negative");
  if (c.w_sem == 0.0 && c.w_kw == 0.0) throw ValidationError("fusion weights must not both be zero");
  if (!(c.kappa > 0.0)) throw ValidationError("fusion kappa must be positive");
}

std::vector<FusedScore> rrf_fuse(std::span<const std::string> semantic,
                                 std::span<const std::string> keyword, const FusionConfig& config) {
  validate(config);
  std::map<std::string, FusedScore> acc;
  for (std::size_t r = 0; r < semantic.size(); ++r) {
    auto& f = acc[semantic[r]];
    if (f.semantic_rank) throw ValidationError("semantic ranking repeats '" + semantic[r] + "'");
    f.semantic_rank = r + 1;
  }
  for (std::size_t r = 0; r < keyword.size(); ++r) {
    auto& f = acc[keyword[r]];
    if (f.keyword_rank) throw ValidationError("keyword ranking repeats '" + keyword[r] + "'");
    f.keyword_rank = r + 1;
  }
  std::vector<FusedScore> out;
  out.reserve(acc.size());
  for (auto& [id, f] : acc) {
    f.id = id;
    f.score = 0.0;
    if (f.semantic_rank) f.score += config.w_sem / (config.kappa + static_cast<double>(*f.semantic_rank));
    if (f.keyword_rank) f.score += config.w_kw / (config.kappa + static_cast<double>(*f.keyword_rank));
    out.push_back(std::move(f));
  }
  std::stable_sort(out.begin(), out.end(), [](const FusedScore& a, const FusedScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

std::string_view mode_name(RetrievalMode m) {
  switch (m) {
    case RetrievalMode::kHybrid:
      return "hybrid";
    case RetrievalMode::kSemantic:
      return "semantic";
    case RetrievalMode::kKeyword:
      break;
  }
  return "keyword";
}

RetrievalMode parse_mode(std::string_view s) {
  if (s == "hybrid") return RetrievalMode::kHybrid;
  if (s == "semantic") return RetrievalMode::kSemantic;
  if (s == "keyword") return RetrievalMode::kKeyword;
  throw ValidationError("unknown retrieval mode '" + std::string(s) + "' (hybrid, semantic, keyword)");
}

// ---------------------------------------------------------------------------

KnowledgeIndex::KnowledgeIndex(std::shared_ptr<const EmbeddingProvider> provider, Bm25Params bm25,
                               FusionConfig fusion)
    : provider_(std::move(provider)), bm25_(bm25), fusion_(fusion) {
  if (!provider_) throw ValidationError("knowledge index needs an embedding provider");
  if (!(bm25_.k1 >= 0.0) || !(bm25_.b >= 0.0 && bm25_.b <= 1.0))
    throw ValidationError("BM25 needs k1 >= 0 and b in [0, 1]");
  validate(fusion_);
}

std::size_t KnowledgeIndex::ingest(const Document& doc, Adapter adapter) {
  if (doc.id.empty()) throw ValidationError("document id must not be empty");
  if (doc.id.find_first_of("\t\r\n") != std::string::npos)
    throw ValidationError("document id must not contain tabs or line breaks");
  auto known = [&] {
    return std::any_of(documents_.begin(), documents_.end(),
                       [&](const DocumentInfo& d) { return d.id == doc.id; });
  };
  {
    std::shared_lock lock(mutex_);
    if (known()) throw ValidationError("duplicate document id '" + doc.id + "'");
  }

  const auto extracted = extract(doc, adapter);
  const auto tokens = tokenize(extracted.text);
  const auto windows = chunk_tokens(tokens);

  std::vector<std::string> texts;
  texts.reserve(windows.size());
  for (const auto& w : windows) texts.push_back(join(w.tokens));
  std::vector<std::vector<double>> vectors;
  if (!texts.empty()) {
    try {
      vectors = provider_->embed(texts);
    } catch (const ProviderError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProviderError("embedding provider " + provider_->name() + " failed: " + e.what());
    }
    if (vectors.size() != texts.size())
      throw ProviderError("embedding provider returned " + std::to_string(vectors.size()) + " vectors for " +
                          std::to_string(texts.size()) + " chunks");
    for (const auto& v : vectors)
      if (v.size() != provider_->dimension())
        throw ProviderError("embedding provider returned a vector of dimension " + std::to_string(v.size()) +
                            ", declared " + std::to_string(provider_->dimension()));
  }

  std::vector<KnowledgeChunk> fresh;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    KnowledgeChunk c;
    c.id = chunk_id(doc.id, i);
    c.document_id = doc.id;
    c.adapter = adapter;
    c.start = windows[i].start;
    c.tokens = windows[i].tokens;
    c.embedding = std::move(vectors[i]);
    c.metadata = extracted.metadata;
    c.metadata["adapter"] = adapter_name(adapter);
    c.metadata["document_id"] = doc.id;
    c.metadata["format"] = format_name(doc.format);
    c.metadata["source"] = doc.source;
    c.metadata["chunk_index"] = std::to_string(i);
    c.metadata["token_start"] = std::to_string(c.start);
    c.metadata["token_end"] = std::to_string(c.start + c.tokens.size());
    fresh.push_back(std::move(c));
  }

  std::unique_lock lock(mutex_);
  if (known()) throw ValidationError("duplicate document id '" + doc.id + "'");
  for (auto& c : fresh)
    if (chunk_index_.count(c.id)) throw ValidationError("chunk id '" + c.id + "' already indexed");
  documents_.push_back({doc.id, adapter, doc.format, doc.source, fresh.size()});
  for (auto& c : fresh) add_chunk_locked(std::move(c));
  return fresh.size();
}

std::size_t KnowledgeIndex::ingest_file(const std::filesystem::path& path, Adapter adapter,
                                        std::optional<std::string> id) {
  Document doc;
  doc.format = format_for_path(path);
  if (!std::filesystem::is_regular_file(path)) throw ValidationError("no such document: " + path.string());
  doc.content = read_file(path);
  doc.id = id ? *id : path.filename().string();
  doc.source = path.filename().string();
  return ingest(doc, adapter);
}

void KnowledgeIndex::add_chunk_locked(KnowledgeChunk chunk) {
  const std::size_t idx = chunks_.size();
  std::map<std::string, std::size_t> tf;
  for (const auto& t : chunk.tokens) ++tf[t];
  for (const auto& [term, n] : tf) postings_[term].push_back({idx, n});
  total_tokens_ += chunk.tokens.size();
  chunk_index_[chunk.id] = idx;
  chunks_.push_back(std::make_unique<KnowledgeChunk>(std::move(chunk)));
}

std::size_t KnowledgeIndex::chunk_count() const {
  std::shared_lock lock(mutex_);
  return chunks_.size();
}

std::size_t KnowledgeIndex::document_count() const {
  std::shared_lock lock(mutex_);
  return documents_.size();
}

bool KnowledgeIndex::empty() const { return chunk_count() == 0; }

const KnowledgeChunk* KnowledgeIndex::find(std::string_view chunk_id) const {
  std::shared_lock lock(mutex_);
  auto it = chunk_index_.find(chunk_id);
  return it == chunk_index_.end() ? nullptr : chunks_[it->second].get();
}

std::vector<const KnowledgeChunk*> KnowledgeIndex::chunks() const {
  std::shared_lock lock(mutex_);
  std::vector<const KnowledgeChunk*> out;
  for (const auto& c : chunks_) out.push_back(c.get());
  return out;
}

std::vector<ScoredChunk> KnowledgeIndex::keyword_rank(std::string_view query) const {
  std::shared_lock lock(mutex_);
  return keyword_rank_locked(query);
}

std::vector<ScoredChunk> KnowledgeIndex::semantic_rank(std::string_view query) const {
  std::shared_lock lock(mutex_);
  return semantic_rank_locked(query);
}

std::vector<ScoredChunk> KnowledgeIndex::keyword_rank_locked(std::string_view query) const {
  if (chunks_.empty()) return {};
  const auto terms = tokenize(query);
  const std::set<std::string> unique(terms.begin(), terms.end());
  const double n = static_cast<double>(chunks_.size());
  const double avgdl = static_cast<double>(total_tokens_) / n;
  std::map<std::size_t, double> scores;
  for (const auto& term : unique) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = bm25_idf(chunks_.size(), it->second.size());
    for (const auto& p : it->second) {
      const double tf = static_cast<double>(p.tf);
      const double dl = static_cast<double>(chunks_[p.chunk]->tokens.size());
      const double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
      scores[p.chunk] += idf * tf * (bm25_.k1 + 1.0) / (tf + bm25_.k1 * (1.0 - bm25_.b + bm25_.b * norm));
    }
  }
  std::vector<ScoredChunk> out;
  out.reserve(scores.size());
  for (const auto& [idx, s] : scores) out.push_back({chunks_[idx]->id, s});
  std::sort(out.begin(), out.end(), by_score_then_id);
  return out;
}

std::vector<ScoredChunk> KnowledgeIndex::semantic_rank_locked(std::string_view query) const {
  if (chunks_.empty()) return {};
  std::vector<std::vector<double>> q;
  const std::string text(query);
  try {
    q = provider_->embed(std::span<const std::string>(&text, 1));
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError("embedding provider " + provider_->name() + " failed: " + e.what());
  }
  if (q.size() != 1 || q[0].size() != provider_->dimension())
    throw ProviderError("embedding provider returned a malformed query vector");
  std::vector<ScoredChunk> out;
  out.reserve(chunks_.size());
  for (const auto& c : chunks_) out.push_back({c->id, cosine(q[0], c->embedding)});
  std::sort(out.begin(), out.end(), by_score_then_id);
  return out;
}

std::vector<RetrievalResult> KnowledgeIndex::retrieve(std::string_view query, std::size_t k,
                                                      RetrievalMode mode) const {
  if (k == 0) throw ValidationError("retrieval needs k >= 1");
  std::shared_lock lock(mutex_);
  if (chunks_.empty()) throw ValidationError("knowledge index is empty");
  auto chunk = [&](const std::string& id) { return chunks_[chunk_index_.find(id)->second].get(); };

  std::vector<RetrievalResult> out;
  if (mode == RetrievalMode::kHybrid) {
    std::vector<std::string> sem, kw;
    for (const auto& s : semantic_rank_locked(query)) sem.push_back(s.id);
    for (const auto& s : keyword_rank_locked(query)) kw.push_back(s.id);
    for (const auto& f : rrf_fuse(sem, kw, fusion_)) {
      if (out.size() == k) break;
      out.push_back({chunk(f.id), f.score, f.semantic_rank, f.keyword_rank});
    }
    return out;
  }
  const auto ranking = mode == RetrievalMode::kSemantic ? semantic_rank_locked(query) : keyword_rank_locked(query);
  for (std::size_t r = 0; r < ranking.size() && out.size() < k; ++r) {
    RetrievalResult res{chunk(ranking[r].id), ranking[r].score, std::nullopt, std::nullopt};
    (mode == RetrievalMode::kSemantic ? res.semantic_rank : res.keyword_rank) = r + 1;
    out.push_back(res);
  }
  return out;
}

std::string KnowledgeIndex::postings_text_locked() const {
  std::string out = std::string(kPostingsHeader) + std::to_string(kIndexFormatVersion) + "\n";
  for (const auto& [term, list] : postings_) {
    out += term;
    out += '\t';
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(list[i].chunk) + ":" + std::to_string(list[i].tf);
    }
    out += '\n';
  }
  return out;
}

void KnowledgeIndex::save(const std::filesystem::path& dir) const {
  std::shared_lock lock(mutex_);
  std::filesystem::create_directories(dir);
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : documents_)
    docs.push_back({{"id", d.id},
                    {"adapter", adapter_name(d.adapter)},
                    {"format", format_name(d.format)},
                    {"source", d.source},
                    {"chunks", d.chunks}});
  nlohmann::json chunks = nlohmann::json::array();
  for (const auto& c : chunks_)
    chunks.push_back({{"id", c->id},
                      {"document_id", c->document_id},
                      {"adapter", adapter_name(c->adapter)},
                      {"start", c->start},
                      {"text", c->text()},
                      {"metadata", c->metadata}});
  const nlohmann::json meta = {
      {"format_version", kIndexFormatVersion},
      {"provider", {{"name", provider_->name()}, {"dimension", provider_->dimension()}}},
      {"bm25", {{"k1", bm25_.k1}, {"b", bm25_.b}}},
      {"fusion", {{"w_sem", fusion_.w_sem}, {"w_kw", fusion_.w_kw}, {"kappa", fusion_.kappa}}},
      {"documents", docs},
      {"chunks", chunks}};

  std::string vectors = std::string(kVectorsHeader) + std::to_string(kIndexFormatVersion) + "\n";
  for (const auto& c : chunks_) {
    vectors += c->id;
    vectors += '\t';
    for (std::size_t i = 0; i < c->embedding.size(); ++i) {
      if (i) vectors += ' ';
      vectors += format_double(c->embedding[i]);
    }
    vectors += '\n';
  }
  write_file_atomic(dir / "postings.tsv", postings_text_locked());
  write_file_atomic(dir / "vectors.tsv", vectors);
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

std::unique_ptr<KnowledgeIndex> KnowledgeIndex::load(const std::filesystem::path& dir,
                                                     std::shared_ptr<const EmbeddingProvider> provider) {
  for (const char* f : {"meta.json", "postings.tsv", "vectors.tsv"})
    if (!std::filesystem::is_regular_file(dir / f))
      throw ValidationError("knowledge index at " + dir.string() + " is missing " + f);

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("meta.json", std::string("unreadable index metadata: ") + e.what());
  }
  const auto version = meta.value("format_version", -1);
  if (version != kIndexFormatVersion)
    throw VersionError("knowledge index format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kIndexFormatVersion) + ")");

  const auto postings_text = read_file(dir / "postings.tsv");
  const auto vectors_text = read_file(dir / "vectors.tsv");
  for (const auto& [file, text, prefix] :
       {std::tuple{std::string("postings.tsv"), &postings_text, kPostingsHeader},
        std::tuple{std::string("vectors.tsv"), &vectors_text, kVectorsHeader}}) {
    const auto v = header_version(text->substr(0, text->find('\n')), prefix, file);
    if (v != kIndexFormatVersion) throw VersionError(file + " has format version " + std::to_string(v));
  }

  std::unique_ptr<KnowledgeIndex> idx;
  try {
    const auto& p = meta.at("provider");
    if (!provider || p.at("name").get<std::string>() != provider->name() ||
        p.at("dimension").get<std::size_t>() != provider->dimension())
      throw ProviderError("index was built with provider " + p.at("name").get<std::string>() + " (dimension " +
                          std::to_string(p.at("dimension").get<std::size_t>()) + ")" +
                          (provider ? ", not " + provider->name() : std::string()));
    Bm25Params bm25{meta.at("bm25").at("k1").get<double>(), meta.at("bm25").at("b").get<double>()};
    const auto& f = meta.at("fusion");
    FusionConfig fusion{f.at("w_sem").get<double>(), f.at("w_kw").get<double>(), f.at("kappa").get<double>()};
    idx = std::make_unique<KnowledgeIndex>(std::move(provider), bm25, fusion);

    for (const auto& d : meta.at("documents"))
      idx->documents_.push_back({d.at("id").get<std::string>(), parse_adapter(d.at("adapter").get<std::string>()),
                                 parse_format(d.at("format").get<std::string>()), d.at("source").get<std::string>(),
                                 d.at("chunks").get<std::size_t>()});

    std::map<std::string, std::vector<double>> vectors;
    std::istringstream vin(vectors_text);
    std::string line;
    std::getline(vin, line);
    while (std::getline(vin, line)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw IntegrityError("vectors.tsv", "malformed line in vectors.tsv");
      std::vector<double> v;
      std::istringstream values(line.substr(tab + 1));
      double x = 0.0;
      while (values >> x) v.push_back(x);
      if (v.size() != idx->provider_->dimension())
        throw IntegrityError("vectors.tsv", "vector for " + line.substr(0, tab) + " has the wrong dimension");
      vectors[line.substr(0, tab)] = std::move(v);
    }

    for (const auto& j : meta.at("chunks")) {
      KnowledgeChunk c;
      j.at("id").get_to(c.id);
      j.at("document_id").get_to(c.document_id);
      c.adapter = parse_adapter(j.at("adapter").get<std::string>());
      c.start = j.at("start").get<std::size_t>();
      c.tokens = tokenize(j.at("text").get<std::string>());
      j.at("metadata").get_to(c.metadata);
      auto v = vectors.find(c.id);
      if (v == vectors.end()) throw IntegrityError("vectors.tsv", "no vector stored for chunk " + c.id);
      c.embedding = std::move(v->second);
      vectors.erase(v);
      if (idx->chunk_index_.count(c.id)) throw IntegrityError("meta.json", "chunk " + c.id + " appears twice");
      idx->add_chunk_locked(std::move(c));
    }
    if (!vectors.empty()) throw IntegrityError("vectors.tsv", "vectors.tsv holds vectors for unknown chunks");
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("meta.json", std::string("malformed index metadata: ") + e.what());
  }
  if (idx->postings_text_locked() != postings_text)
    throw IntegrityError("postings.tsv", "stored postings disagree with the stored chunks");
  return idx;
}

}  // namespace homesim::knowledge
