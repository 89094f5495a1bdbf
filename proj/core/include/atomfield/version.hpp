#pragma once

namespace atomfield {

inline constexpr int kVersionMajor = 1;
inline constexpr int kVersionMinor = 0;
inline constexpr int kVersionPatch = 0;
inline constexpr const char* kVersionString = "1.0.0";

/// Summary-JSON schema version; bumped on any layout change.
inline constexpr int kSummarySchemaVersion = 1;

}  // namespace atomfield
