#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lave {

enum class ErrorCode {
    // providers
    ProviderUnavailable,
    ResponseEmpty,
    DimensionMismatch,
    InvalidEmbedding,
    UnreadableFrame,
    // narration
    UndecodableMedia,
    CaptioningFailed,
    MalformedNarration,
    // vectorstore
    EmptyIndex,
    EmptyQuery,
    // agent
    MissingGoal,
    MissingActions,
    UnknownFunction,
    PreambleOverBudget,
    ExecutionFailed,
    TranslationMismatch,
    // functions
    EmptyGallery,
    PermutationViolation,
    MalformedStructuredOutput,
    CorpusTooLarge,
    // project
    UnknownAsset,
    DuplicateOnTimeline,
    NotAPermutation,
    InvalidRange,
    ClipNotOnTimeline,
    NothingToUndo,
    MediaEngineFailure,
    EmptyTimeline,
    // service
    ProjectNotFound,
    SchemaVersionUnsupported,
    SessionNotFound,
    InvalidRequest,
    // shared
    InvalidArgument,
    ConfigError,
    IoError,
};

/// Stable machine-readable name, used in API error payloads and logs.
constexpr std::string_view code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ProviderUnavailable: return "provider_unavailable";
        case ErrorCode::ResponseEmpty: return "response_empty";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::InvalidEmbedding: return "invalid_embedding";
        case ErrorCode::UnreadableFrame: return "unreadable_frame";
        case ErrorCode::UndecodableMedia: return "undecodable_media";
        case ErrorCode::CaptioningFailed: return "captioning_failed";
        case ErrorCode::MalformedNarration: return "malformed_narration";
        case ErrorCode::EmptyIndex: return "empty_index";
        case ErrorCode::EmptyQuery: return "empty_query";
        case ErrorCode::MissingGoal: return "missing_goal";
        case ErrorCode::MissingActions: return "missing_actions";
        case ErrorCode::UnknownFunction: return "unknown_function";
        case ErrorCode::PreambleOverBudget: return "preamble_over_budget";
        case ErrorCode::ExecutionFailed: return "execution_failed";
        case ErrorCode::TranslationMismatch: return "translation_mismatch";
        case ErrorCode::EmptyGallery: return "empty_gallery";
        case ErrorCode::PermutationViolation: return "permutation_violation";
        case ErrorCode::MalformedStructuredOutput: return "malformed_structured_output";
        case ErrorCode::CorpusTooLarge: return "corpus_too_large";
        case ErrorCode::UnknownAsset: return "unknown_asset";
        case ErrorCode::DuplicateOnTimeline: return "duplicate_on_timeline";
        case ErrorCode::NotAPermutation: return "not_a_permutation";
        case ErrorCode::InvalidRange: return "invalid_range";
        case ErrorCode::ClipNotOnTimeline: return "clip_not_on_timeline";
        case ErrorCode::NothingToUndo: return "nothing_to_undo";
        case ErrorCode::MediaEngineFailure: return "media_engine_failure";
        case ErrorCode::EmptyTimeline: return "empty_timeline";
        case ErrorCode::ProjectNotFound: return "project_not_found";
        case ErrorCode::SchemaVersionUnsupported: return "schema_version_unsupported";
        case ErrorCode::SessionNotFound: return "session_not_found";
        case ErrorCode::InvalidRequest: return "invalid_request";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::ConfigError: return "config_error";
        case ErrorCode::IoError: return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return lave::code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace lave
