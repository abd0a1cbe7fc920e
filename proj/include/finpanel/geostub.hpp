#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace finpanel::geo {

/// Offline stand-in for the geocoding service. Serves a fixture database of
/// (kind,key,lat,lon,rank) rows over the same wire format the pipeline
/// queries: house-kind keys answer house-level queries, street-kind keys
/// answer queries without a house, city-kind keys answer region+city
/// queries. Unknown keys return an empty result array.
class StubGeoService {
  public:
    StubGeoService();
    ~StubGeoService();

    void load_db(const std::filesystem::path &path);

    /// Starts serving on 127.0.0.1; port 0 picks a free port. Returns the
    /// bound port. Serving happens on a background thread.
    int start(int port = 0);
    void stop();

    std::string base_url() const;
    std::size_t request_count() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace finpanel::geo
