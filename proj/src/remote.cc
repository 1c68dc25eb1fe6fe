#include <cstdio>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "embscore/embeddings.h"
#include "embscore/error.h"
#include "embscore/random.h"

namespace embscore {

using nlohmann::json;

RemoteClient::RemoteClient(RemoteOptions options) : options_(std::move(options)) {
  const std::string& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw Error(ErrorKind::kInvalidInput,
                "remote endpoint must be an http:// URL, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = url;
    path_ = "/";
  } else {
    scheme_host_port_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
  if (options_.retries < 0) options_.retries = 0;
}

std::string RemoteClient::Fingerprint() const {
  std::string s = "remote:" + options_.endpoint + ":layers=";
  for (std::size_t i = 0; i < options_.layers.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(options_.layers[i]);
  }
  return s;
}

std::string RemoteClient::PostOnce(const std::string& body) const {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(path_, body, "application/json");
  if (!res) {
    throw Error(ErrorKind::kProviderUnavailable,
                "request to " + options_.endpoint + " failed: " +
                    httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::kProviderUnavailable,
                "request to " + options_.endpoint + " returned HTTP " +
                    std::to_string(res->status));
  }
  return res->body;
}

std::vector<EmbeddingRecord> RemoteClient::FetchBatch(
    std::span<const Sentence> sentences) const {
  if (sentences.empty()) return {};
  json req;
  req["sentences"] = json::array();
  for (const auto& s : sentences) {
    req["sentences"].push_back({{"id", s.id}, {"text", s.text}});
  }
  req["layers"] = options_.layers;
  const std::string body = req.dump();

  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    std::string payload;
    try {
      payload = PostOnce(body);
    } catch (const Error& e) {
      last_error = e.what();
      continue;
    }
    // A malformed payload is a provider failure, not a caller error.
    std::unordered_map<std::string, EmbeddingRecord> by_id;
    try {
      std::size_t start = 0;
      while (start < payload.size()) {
        std::size_t end = payload.find('\n', start);
        if (end == std::string::npos) end = payload.size();
        if (end > start) {
          auto rec = ParseEmbeddingRecord(
              std::string_view(payload).substr(start, end - start));
          by_id.insert_or_assign(rec.id, std::move(rec));
        }
        start = end + 1;
      }
    } catch (const Error& e) {
      last_error = std::string("malformed response: ") + e.what();
      continue;
    }
    std::vector<EmbeddingRecord> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
      auto it = by_id.find(s.id);
      if (it == by_id.end()) {
        throw Error(ErrorKind::kMissingSentence,
                    "remote provider returned no record for id '" + s.id + "'");
      }
      out.push_back(it->second);
    }
    return out;
  }
  throw Error(ErrorKind::kProviderUnavailable,
              "giving up after " + std::to_string(options_.retries + 1) +
                  " attempts: " + last_error);
}

EmbeddingRecord RemoteClient::Fetch(const Sentence& sentence) const {
  return FetchBatch(std::span<const Sentence>(&sentence, 1)).front();
}

}  // namespace embscore
