#pragma once

// Span data model shared by every stage of the projection pipeline.
//
// Text is stored as UTF-8; every offset counts Unicode scalar values, so a
// span written on one platform means the same region everywhere.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lp {

/// One labeled region [start, end) of a text.
struct Span {
  std::string tag;
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<std::string> label;

  std::size_t length() const noexcept { return end - start; }

  friend bool operator==(const Span&, const Span&) = default;
};

struct AnnotatedText {
  std::string id;
  std::string lang;
  std::string text;
  std::vector<Span> spans;

  friend bool operator==(const AnnotatedText&, const AnnotatedText&) = default;
};

/// A string with inline markers.
struct TaggedText {
  std::string id;
  std::string lang;
  std::string tagged;

  friend bool operator==(const TaggedText&, const TaggedText&) = default;
};

/// Source/target pair sharing one id. Direction is carried by the side
/// languages.
template <class Side>
struct ParallelExample {
  std::string id;
  Side src;
  Side tgt;

  const std::string& src_lang() const noexcept { return src.lang; }
  const std::string& tgt_lang() const noexcept { return tgt.lang; }

  friend bool operator==(const ParallelExample&, const ParallelExample&) = default;
};

using TaggedPair = ParallelExample<TaggedText>;
using AnnotatedPair = ParallelExample<AnnotatedText>;

enum class Severity { Info, Warning, Error };

std::string_view to_string(Severity s);

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  /// Scalar offset into the inspected text, when the problem has a location.
  std::optional<std::size_t> offset;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

class Diagnostics {
 public:
  void add(Severity severity, std::string code, std::string message,
           std::optional<std::size_t> offset = std::nullopt);
  void append(const Diagnostics& other);

  bool empty() const noexcept { return records_.empty(); }
  std::size_t size() const noexcept { return records_.size(); }
  bool has_errors() const noexcept;
  std::size_t count(std::string_view code) const noexcept;

  const std::vector<Diagnostic>& records() const noexcept { return records_; }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;

 private:
  std::vector<Diagnostic> records_;
};

namespace diag {
inline constexpr std::string_view kOffsetOob = "OFFSET_OOB";
inline constexpr std::string_view kSameNameOverlap = "SAME_NAME_OVERLAP";
inline constexpr std::string_view kEmptyTag = "EMPTY_TAG";
inline constexpr std::string_view kInvalidTag = "INVALID_TAG";
inline constexpr std::string_view kMarkerCollision = "MARKER_COLLISION";
inline constexpr std::string_view kLangEqual = "LANG_EQUAL";
inline constexpr std::string_view kIdMismatch = "ID_MISMATCH";
}  // namespace diag

/// Tag-name grammar. The default accepts [a-z]+; semantic tags such as
/// <PER> need allow_uppercase.
struct TagGrammar {
  bool allow_uppercase = false;
};

bool is_valid_tag_name(std::string_view name, const TagGrammar& grammar = {}) noexcept;

/// Checks every AnnotatedText invariant. Pure; one record per violation.
///
/// Error-severity codes: OFFSET_OOB, SAME_NAME_OVERLAP, EMPTY_TAG,
/// INVALID_TAG. MARKER_COLLISION is a warning: the text itself contains a
/// substring that parses as a marker, so round-trip through the codec is not
/// guaranteed.
Diagnostics validate(const AnnotatedText& doc, const TagGrammar& grammar = {});

template <class Side>
Diagnostics validate_pair(const ParallelExample<Side>& ex) {
  Diagnostics d;
  if (ex.src.lang == ex.tgt.lang) {
    d.add(Severity::Error, std::string(diag::kLangEqual),
          "source and target language are both '" + ex.src.lang + "'");
  }
  if (ex.src.id != ex.id || ex.tgt.id != ex.id) {
    d.add(Severity::Error, std::string(diag::kIdMismatch),
          "sides do not share the example id '" + ex.id + "'");
  }
  return d;
}

/// Surface string of a span, cut by scalar offsets.
std::string span_text(const AnnotatedText& doc, const Span& span);

}  // namespace lp
