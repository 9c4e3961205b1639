#ifndef DEEPHATE_LOG_H_
#define DEEPHATE_LOG_H_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace deephate::log {

enum class Level { kDebug, kInfo, kWarning, kError };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes info and above to stderr.
Sink set_sink(Sink sink);
void set_min_level(Level level);

void write(Level level, std::string_view message);
inline void debug(std::string_view m) { write(Level::kDebug, m); }
inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void warn(std::string_view m) { write(Level::kWarning, m); }
inline void error(std::string_view m) { write(Level::kError, m); }

// Captures messages for the lifetime of the object; used by tests and by
// commands that surface warnings in their manifests.
class ScopedCapture {
 public:
  ScopedCapture();
  ~ScopedCapture();
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& warnings() const { return warnings_; }
  bool saw_warning_containing(std::string_view needle) const;

 private:
  Sink previous_;
  std::vector<std::string> warnings_;
};

}  // namespace deephate::log

#endif  // DEEPHATE_LOG_H_
