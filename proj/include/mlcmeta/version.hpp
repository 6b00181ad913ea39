#pragma once

namespace mlcmeta {

inline constexpr const char* library_version = "0.1.0";

// Version tag of the default meta-feature catalogue. Bumped whenever the
// default feature set or any feature definition changes.
inline constexpr const char* catalogue_version = "mlcmeta-catalogue-v1";

} // namespace mlcmeta
