#pragma once

namespace padp {

#ifndef PADP_GIT_REVISION
#define PADP_GIT_REVISION "unknown"
#endif

inline const char* version_string() { return "padp 0.1.0+" PADP_GIT_REVISION; }

}  // namespace padp
