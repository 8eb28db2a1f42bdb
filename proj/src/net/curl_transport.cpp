#include <curl/curl.h>

#include <algorithm>
#include <memory>
#include <mutex>

#include "wmsmon/net/transport.hpp"

namespace wmsmon {

namespace {

struct EasyDeleter {
  void operator()(CURL* h) const { curl_easy_cleanup(h); }
};

struct BodySink {
  std::string* body;
  std::size_t cap;
  bool overflow = false;
};

std::size_t on_body(char* ptr, std::size_t size, std::size_t nmemb, void* userdata) {
  auto* sink = static_cast<BodySink*>(userdata);
  const std::size_t n = size * nmemb;
  if (sink->body->size() + n > sink->cap) {
    sink->overflow = true;
    return 0;  // aborts the transfer
  }
  sink->body->append(ptr, n);
  return n;
}

std::int64_t info_us(CURL* h, CURLINFO what) {
  curl_off_t v = 0;
  if (curl_easy_getinfo(h, what, &v) != CURLE_OK) return 0;
  return static_cast<std::int64_t>(v);
}

TransportFailure map_failure(CURLcode code) {
  switch (code) {
    case CURLE_OK: return TransportFailure::None;
    case CURLE_COULDNT_RESOLVE_HOST:
    case CURLE_COULDNT_RESOLVE_PROXY: return TransportFailure::DnsFailure;
    case CURLE_COULDNT_CONNECT: return TransportFailure::ConnectFailure;
    case CURLE_OPERATION_TIMEDOUT: return TransportFailure::Timeout;
    default: return TransportFailure::NetworkError;
  }
}

}  // namespace

CurlTransport::CurlTransport(std::string user_agent) : user_agent_(std::move(user_agent)) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::fetch(const HttpRequest& request) {
  HttpResponse response;
  std::unique_ptr<CURL, EasyDeleter> h(curl_easy_init());
  if (!h) {
    response.failure = TransportFailure::NetworkError;
    response.error_message = "curl_easy_init failed";
    return response;
  }
  BodySink sink{&response.body, request.max_body_bytes};
  CURL* c = h.get();
  curl_easy_setopt(c, CURLOPT_URL, request.url.c_str());
  curl_easy_setopt(c, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(c, CURLOPT_MAXREDIRS, static_cast<long>(request.max_redirects));
  curl_easy_setopt(c, CURLOPT_TIMEOUT_MS, static_cast<long>(request.timeout.count()));
  curl_easy_setopt(c, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(c, CURLOPT_USERAGENT, user_agent_.c_str());
  curl_easy_setopt(c, CURLOPT_ACCEPT_ENCODING, "");
  curl_easy_setopt(c, CURLOPT_WRITEFUNCTION, on_body);
  curl_easy_setopt(c, CURLOPT_WRITEDATA, &sink);

  const CURLcode code = curl_easy_perform(c);
  response.failure = map_failure(code);
  if (sink.overflow) {
    response.failure = TransportFailure::NetworkError;
    response.error_message = "response body exceeds cap";
  } else if (code != CURLE_OK) {
    response.error_message = curl_easy_strerror(code);
  }

  long status = 0;
  curl_easy_getinfo(c, CURLINFO_RESPONSE_CODE, &status);
  response.status = static_cast<int>(status);
  char* ctype = nullptr;
  if (curl_easy_getinfo(c, CURLINFO_CONTENT_TYPE, &ctype) == CURLE_OK && ctype != nullptr) {
    response.content_type = ctype;
  }
  char* effective = nullptr;
  if (curl_easy_getinfo(c, CURLINFO_EFFECTIVE_URL, &effective) == CURLE_OK && effective) {
    response.effective_url = effective;
  }

  PhaseMarks marks;
  marks.dns_done_us = info_us(c, CURLINFO_NAMELOOKUP_TIME_T);
  marks.connect_done_us =
      std::max(info_us(c, CURLINFO_CONNECT_TIME_T), info_us(c, CURLINFO_APPCONNECT_TIME_T));
  marks.first_byte_us = info_us(c, CURLINFO_STARTTRANSFER_TIME_T);
  marks.total_us = info_us(c, CURLINFO_TOTAL_TIME_T);
  std::optional<Millis> clamp;
  if (response.failure == TransportFailure::Timeout) {
    clamp = request.timeout;
    marks.total_us = std::max<std::int64_t>(marks.total_us, request.timeout.count() * 1000);
  }
  response.timing = compose_timing(marks, clamp);
  return response;
}

}  // namespace wmsmon
