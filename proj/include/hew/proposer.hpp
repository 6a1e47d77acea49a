#pragma once

#include <optional>

#include "hew/dsl.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// External proposer boundary: one spawned subprocess per proposal, one JSON
// request line on stdin, one JSON response line ({"template": "<text>"}) on
// stdout. Failures surface as ProposerTimeout / ProposerProtocolError and the
// caller falls back to built-in mutation.
// ---------------------------------------------------------------------------

struct ProposerConfig {
  std::string command; // run via sh -c; empty = no external proposer
  int timeout_ms = 60000;

  /// Applies HEW_PROPOSER_CMD and HEW_PROPOSER_TIMEOUT_MS overrides.
  static ProposerConfig from_env(ProposerConfig base);
};

struct ProposalRequest {
  struct Parent {
    std::string template_text;
    std::optional<double> score;
    std::string diagnostics;
  };
  std::vector<Parent> parents;
  std::string task_id;
  std::string catalog_name;
  int catalog_version = 1;
};

std::string proposal_request_json(const ProposalRequest& req);

/// Throws ProposerTimeout, ProposerProtocolError, or SyntaxError (bad
/// template text). Never blocks past the timeout.
PolicyTemplate external_propose(const ProposerConfig& cfg,
                                const ProposalRequest& req);

} // namespace hew
