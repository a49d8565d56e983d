#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sdna {

// Every protocol-visible failure has a stable name; the CLI prints it and the
// scenario engine matches on it.
enum class Errc : std::uint8_t {
  Malformed,
  InvalidThreshold,
  DuplicateIndex,
  WrongResponseCount,
  NonInvertibleBlind,
  AuthenticationFailure,
  LevelViolation,
  TypeMismatch,
  NotASubset,
  NoSubtokenKey,
  BadSignature,
  UntrustedRoot,
  Expired,
  Revoked,
  BadServerCert,
  BadKeyExchangeSig,
  FinishedMismatch,
  ResumptionDisabled,
  BadClientChain,
  BadServerChain,
  BadServerSig,
  BadCookie,
  BadClientSig,
  ProtocolState,
  RateLimited,
  BadEltChain,
  AuthBackendRejected,
  UnknownDevice,
  BadResponseBinding,
  Dropped,
  ScriptError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(detail) {}
  explicit Error(Errc code) : Error(code, "") {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace sdna
