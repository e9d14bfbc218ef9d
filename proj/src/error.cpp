#include "ttbys/error.hpp"

namespace ttbys {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::NonAlternatingRoles: return "NonAlternatingRoles";
    case ErrorCode::EmptyUtterance: return "EmptyUtterance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::SummarizerFailure: return "SummarizerFailure";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::EmbedderMismatch: return "EmbedderMismatch";
    case ErrorCode::EmptyKnowledgeBase: return "EmptyKnowledgeBase";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::EmptyGeneration: return "EmptyGeneration";
    case ErrorCode::NoLabelTokens: return "NoLabelTokens";
    case ErrorCode::UnparseableBelief: return "UnparseableBelief";
    case ErrorCode::MalformedJudgeOutput: return "MalformedJudgeOutput";
    case ErrorCode::MalformedAnnotation: return "MalformedAnnotation";
    case ErrorCode::EmptyRetrieval: return "EmptyRetrieval";
    case ErrorCode::NoMass: return "NoMass";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::AllNeutral: return "AllNeutral";
    case ErrorCode::LabelMisalignment: return "LabelMisalignment";
    case ErrorCode::MultiPartyDialogue: return "MultiPartyDialogue";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::SplitOverlap: return "SplitOverlap";
    case ErrorCode::SizeTooLarge: return "SizeTooLarge";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    case ErrorCode::SessionBusy: return "SessionBusy";
    case ErrorCode::UnknownDimension: return "UnknownDimension";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message) {
  std::string out(to_string(code));
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(decorate(code, message)), code_(code) {}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(decorate(code, "line " + std::to_string(line) + ": " + message)),
      code_(code),
      line_(line) {}

Error Error::with_stage(const std::string& stage) const {
  Error copy = *this;
  static_cast<std::runtime_error&>(copy) =
      std::runtime_error("[" + stage + "] " + std::string(what()));
  copy.stage_ = stage;
  return copy;
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace ttbys
