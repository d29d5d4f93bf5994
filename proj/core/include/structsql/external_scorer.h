#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "structsql/decode.h"

namespace structsql {

/// Handshake answer from a remote scorer.
struct RemoteVocab {
  std::size_t size = 0;
  TokenId eos_id = 0;
  std::string tokenizer_tag;
};

class ExternalScorer : public TokenScorer {
 public:
  virtual const RemoteVocab& remote_vocab() const = 0;
};

/// Connects to a scorer speaking the line-delimited JSON protocol and runs
/// the handshake. Endpoints:
///   tcp:HOST:PORT   TCP socket
///   exec:COMMAND    child process started with /bin/sh -c, talking over
///                   its standard input and output
/// Throws TransportError, TimeoutError or ProtocolViolation. Requests from
/// one proxy are serialized; separate proxies are independent.
std::unique_ptr<ExternalScorer> external_scorer_connect(const std::string& endpoint,
                                                        std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace structsql
