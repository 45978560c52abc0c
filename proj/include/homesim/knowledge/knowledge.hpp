#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homesim::knowledge {

/// Lowercased runs of ASCII letters and digits. A '-' or '_' between two
/// such characters stays inside the token, so "CVE-2021-44228" and "Z-Wave"
/// survive intact. Bytes >= 0x80 count as letters.
std::vector<std::string> tokenize(std::string_view text);

inline constexpr std::size_t kChunkSize = 512;
inline constexpr std::size_t kChunkOverlap = 50;

struct TokenWindow {
  std::size_t start = 0;
  std::vector<std::string> tokens;
};

/// Windows of `size` tokens with stride size - overlap, the last one partial.
/// Throws ValidationError when overlap >= size.
std::vector<TokenWindow> chunk_tokens(std::span<const std::string> tokens,
                                      std::size_t size = kChunkSize,
                                      std::size_t overlap = kChunkOverlap);

enum class Adapter { kAcademic, kThreat, kDevice };
std::string_view adapter_name(Adapter a);
Adapter parse_adapter(std::string_view s);

enum class DocumentFormat { kText, kMarkdown, kStructured };
std::string_view format_name(DocumentFormat f);
/// From a file extension: .txt/.text, .md/.markdown, .json. Throws
/// ValidationError for anything else, PDF included.
DocumentFormat format_for_path(const std::filesystem::path& path);

struct Document {
  std::string id;
  std::string content;
  DocumentFormat format = DocumentFormat::kText;
  std::string source = "inline";
};

struct KnowledgeChunk {
  std::string id;  // "<document id>#<4-digit index>", the tie-break key
  std::string document_id;
  Adapter adapter = Adapter::kAcademic;
  std::size_t start = 0;  // first token position in the document
  std::vector<std::string> tokens;
  std::vector<double> embedding;
  std::map<std::string, std::string> metadata;

  std::string text() const;  // tokens joined by single spaces
  bool operator==(const KnowledgeChunk&) const = default;
};

/// Text handed to the tokenizer plus adapter-specific metadata fields.
struct Extracted {
  std::string text;
  std::map<std::string, std::string> metadata;
};

/// Markdown loses fences, emphasis markers and link targets and its first
/// heading becomes "title". Structured JSON contributes every string value in
/// key order; top-level fields the adapter knows (title/authors/year,
/// id/cve/technique/name, device_type/type/protocols/manufacturer) become
/// metadata. Throws ValidationError for malformed JSON.
Extracted extract(const Document& doc, Adapter adapter);

// ---------------------------------------------------------------------------
// Embedding providers

/// Contract: embed() is deterministic, returns one vector per input of
/// exactly dimension() entries, and throws ProviderError on failure.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) const = 0;
};

/// Offline reference provider: unigrams and bigrams of the token stream are
/// hashed with a seed to a (bucket, sign) pair and accumulated, then the
/// vector is scaled to unit length. A sparse random projection of the n-gram
/// counts. Empty text maps to the zero vector.
class HashingProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;
  static constexpr std::uint64_t kDefaultSeed = 0x5EEDF00DULL;

  explicit HashingProvider(std::size_t dimension = kDefaultDimension,
                           std::uint64_t seed = kDefaultSeed);

  std::string name() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) const override;

  std::vector<double> embed_one(std::string_view text) const;
  /// Bucket and sign of one feature string, exposed for tests.
  std::pair<std::size_t, double> feature_slot(std::string_view feature) const;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// 0 when either vector is all zeros. Throws ValidationError on a length
/// mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Ranking

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// ln((N - n + 0.5) / (n + 0.5) + 1); always positive.
double bm25_idf(std::size_t n_chunks, std::size_t n_containing);

struct ScoredChunk {
  std::string id;
  double score = 0.0;
};

struct FusionConfig {
  double w_sem = 0.7;
  double w_kw = 0.3;
  double kappa = 60.0;
};

/// Throws ValidationError for negative weights, both weights zero, or kappa <= 0.
void validate(const FusionConfig& config);

struct FusedScore {
  std::string id;
  double score = 0.0;
  std::optional<std::size_t> semantic_rank;  // 1-based
  std::optional<std::size_t> keyword_rank;
};

/// w_sem / (kappa + rank_sem) + w_kw / (kappa + rank_kw); a ranking that
/// omits an id adds 0 for that term. Sorted by score descending, then id.
/// Rankings must not repeat ids.
std::vector<FusedScore> rrf_fuse(std::span<const std::string> semantic,
                                 std::span<const std::string> keyword,
                                 const FusionConfig& config = {});

enum class RetrievalMode { kHybrid, kSemantic, kKeyword };
std::string_view mode_name(RetrievalMode m);
RetrievalMode parse_mode(std::string_view s);

struct RetrievalResult {
  const KnowledgeChunk* chunk = nullptr;  // owned by the index
  double score = 0.0;  // fused score in hybrid mode, else the ranker's own score
  std::optional<std::size_t> semantic_rank;
  std::optional<std::size_t> keyword_rank;
};

// ---------------------------------------------------------------------------
// Index

inline constexpr int kIndexFormatVersion = 1;

/// Chunk store with BM25 postings and embeddings. One writer or many readers:
/// ingestion takes an exclusive lock, queries a shared one. Chunks are never
/// removed, so pointers handed out in results stay valid while the index lives.
class KnowledgeIndex {
 public:
  explicit KnowledgeIndex(std::shared_ptr<const EmbeddingProvider> provider,
                          Bm25Params bm25 = {}, FusionConfig fusion = {});

  KnowledgeIndex(const KnowledgeIndex&) = delete;
  KnowledgeIndex& operator=(const KnowledgeIndex&) = delete;

  /// Number of chunks added. The index is untouched if anything throws:
  /// ValidationError for a duplicate id or bad content, ProviderError when
  /// the provider fails or returns vectors of the wrong shape.
  std::size_t ingest(const Document& doc, Adapter adapter);
  /// Document id defaults to the file name.
  std::size_t ingest_file(const std::filesystem::path& path, Adapter adapter,
                          std::optional<std::string> id = std::nullopt);

  std::size_t chunk_count() const;
  std::size_t document_count() const;
  bool empty() const;
  const EmbeddingProvider& provider() const { return *provider_; }
  const FusionConfig& fusion() const { return fusion_; }
  const Bm25Params& bm25() const { return bm25_; }
  /// nullptr when absent.
  const KnowledgeChunk* find(std::string_view chunk_id) const;
  std::vector<const KnowledgeChunk*> chunks() const;

  /// Chunks holding at least one query term, by Okapi score (unique query
  /// terms) descending, ties by chunk id.
  std::vector<ScoredChunk> keyword_rank(std::string_view query) const;
  /// Every chunk by cosine with the query embedding, descending, ties by id.
  std::vector<ScoredChunk> semantic_rank(std::string_view query) const;

  /// Top k of the mode's ranking. Throws ValidationError for k == 0 or an
  /// empty index.
  std::vector<RetrievalResult> retrieve(std::string_view query, std::size_t k,
                                        RetrievalMode mode = RetrievalMode::kHybrid) const;

  /// Writes meta.json, postings.tsv and vectors.tsv, each with a format header.
  void save(const std::filesystem::path& dir) const;
  /// Throws VersionError for another format version, ProviderError when the
  /// provider name or dimension differs from the saved one, IntegrityError
  /// when the stored postings disagree with the stored chunks.
  static std::unique_ptr<KnowledgeIndex> load(const std::filesystem::path& dir,
                                              std::shared_ptr<const EmbeddingProvider> provider);

 private:
  struct Posting {
    std::size_t chunk = 0;
    std::size_t tf = 0;
  };
  struct DocumentInfo {
    std::string id;
    Adapter adapter = Adapter::kAcademic;
    DocumentFormat format = DocumentFormat::kText;
    std::string source;
    std::size_t chunks = 0;
  };

  void add_chunk_locked(KnowledgeChunk chunk);
  std::vector<ScoredChunk> keyword_rank_locked(std::string_view query) const;
  std::vector<ScoredChunk> semantic_rank_locked(std::string_view query) const;
  std::string postings_text_locked() const;

  std::shared_ptr<const EmbeddingProvider> provider_;
  Bm25Params bm25_;
  FusionConfig fusion_;
  mutable std::shared_mutex mutex_;
  std::vector<std::unique_ptr<KnowledgeChunk>> chunks_;
  std::map<std::string, std::size_t, std::less<>> chunk_index_;
  std::vector<DocumentInfo> documents_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::size_t total_tokens_ = 0;
};

}  // namespace homesim::knowledge
