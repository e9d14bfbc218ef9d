#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ttbys {

enum class ErrorCode {
  // core_types
  UnknownLabel,
  EmptyHistory,
  NonAlternatingRoles,
  EmptyUtterance,
  InvalidArgument,
  // embedding
  RemoteUnavailable,
  DimensionMismatch,
  // knowledge base
  MissingLabel,
  SummarizerFailure,
  Io,
  Parse,
  EmbedderMismatch,
  EmptyKnowledgeBase,
  // llm gateway
  BackendFailure,
  EmptyGeneration,
  NoLabelTokens,
  UnparseableBelief,
  MalformedJudgeOutput,
  MalformedAnnotation,
  // fusion
  EmptyRetrieval,
  NoMass,
  LabelMismatch,
  // dataset
  AllNeutral,
  LabelMisalignment,
  MultiPartyDialogue,
  EmptyCorpus,
  // evaluation
  LengthMismatch,
  Empty,
  SplitOverlap,
  SizeTooLarge,
  // agent service
  SessionNotFound,
  SessionBusy,
  UnknownDimension,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception. `code()` is the
/// stable discriminator tests and the CLI switch on; `line()` is set for
/// file parse errors (1-based) and `stage()` names the pipeline stage that
/// failed, when known.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, std::size_t line);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error with stage attribution prepended to the message.
  Error with_stage(const std::string& stage) const;

private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace ttbys
