#include "sdna/error.hpp"

namespace sdna {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::Malformed: return "Malformed";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::DuplicateIndex: return "DuplicateIndex";
    case Errc::WrongResponseCount: return "WrongResponseCount";
    case Errc::NonInvertibleBlind: return "NonInvertibleBlind";
    case Errc::AuthenticationFailure: return "AuthenticationFailure";
    case Errc::LevelViolation: return "LevelViolation";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::NotASubset: return "NotASubset";
    case Errc::NoSubtokenKey: return "NoSubtokenKey";
    case Errc::BadSignature: return "BadSignature";
    case Errc::UntrustedRoot: return "UntrustedRoot";
    case Errc::Expired: return "Expired";
    case Errc::Revoked: return "Revoked";
    case Errc::BadServerCert: return "BadServerCert";
    case Errc::BadKeyExchangeSig: return "BadKeyExchangeSig";
    case Errc::FinishedMismatch: return "FinishedMismatch";
    case Errc::ResumptionDisabled: return "ResumptionDisabled";
    case Errc::BadClientChain: return "BadClientChain";
    case Errc::BadServerChain: return "BadServerChain";
    case Errc::BadServerSig: return "BadServerSig";
    case Errc::BadCookie: return "BadCookie";
    case Errc::BadClientSig: return "BadClientSig";
    case Errc::ProtocolState: return "ProtocolState";
    case Errc::RateLimited: return "RateLimited";
    case Errc::BadEltChain: return "BadEltChain";
    case Errc::AuthBackendRejected: return "AuthBackendRejected";
    case Errc::UnknownDevice: return "UnknownDevice";
    case Errc::BadResponseBinding: return "BadResponseBinding";
    case Errc::Dropped: return "Dropped";
    case Errc::ScriptError: return "ScriptError";
  }
  return "Unknown";
}

}  // namespace sdna
