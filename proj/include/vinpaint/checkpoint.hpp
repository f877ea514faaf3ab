#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vinpaint {

/// Container for run state on disk: string metadata plus named typed arrays.
/// Binary layout is documented in docs/checkpoint_format.md and versioned;
/// loading rejects unknown versions and truncated files.
class Checkpoint {
 public:
  enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

  struct Array {
    DType dtype = DType::f32;
    std::vector<std::int64_t> dims;
    std::vector<unsigned char> bytes;
    std::int64_t element_count() const {
      std::int64_t n = 1;
      for (auto d : dims) n *= d;
      return n;
    }
  };

  void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }
  const std::string& meta(const std::string& key) const;
  bool has_meta(const std::string& key) const { return meta_.count(key) > 0; }
  long meta_long(const std::string& key) const;
  double meta_double(const std::string& key) const;

  void put_f32(const std::string& name, const float* data, std::vector<std::int64_t> dims);
  void put_f64(const std::string& name, const double* data, std::vector<std::int64_t> dims);
  const Array& array(const std::string& name) const;
  bool has_array(const std::string& name) const { return arrays_.count(name) > 0; }
  /// Copies the array into dst; throws if the name, type, or size disagree.
  void get_f32(const std::string& name, float* dst, std::int64_t expected_size) const;

  const std::map<std::string, std::string>& all_meta() const { return meta_; }
  const std::map<std::string, Array>& all_arrays() const { return arrays_; }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> meta_;
  std::map<std::string, Array> arrays_;
};

}  // namespace vinpaint
