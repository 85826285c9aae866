#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace dcs {

using WarningSink = std::function<void(std::string_view)>;

// Non-fatal validity warnings (dispersive regime questionable, truncation
// leak, perturbative formula out of range). Default sink writes to stderr.
void warn(std::string_view message);

// Returns the previous sink. Passing an empty function restores stderr.
WarningSink set_warning_sink(WarningSink sink);

// Collects warnings for the lifetime of the object (used by tests and the CLI).
class WarningCapture {
public:
    WarningCapture();
    ~WarningCapture();
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    bool contains(std::string_view needle) const;

private:
    std::vector<std::string> messages_;
    WarningSink previous_;
};

}  // namespace dcs
