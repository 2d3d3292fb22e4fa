#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace quotecast {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConnectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Byte stream behind the RESP client; implemented by a TCP socket in
// production and by scripted buffers in tests.
class ByteStream {
public:
    virtual ~ByteStream() = default;

    // Reads at least one byte, at most n. Returns 0 on timeout, throws
    // IoError on a closed or broken stream.
    virtual std::size_t read_some(char* out, std::size_t n,
                                  std::chrono::milliseconds timeout) = 0;

    virtual void write_all(std::string_view data) = 0;

    virtual void close() = 0;
};

// Blocking TCP connection. Throws ConnectError on refusal or connect timeout.
std::unique_ptr<ByteStream> tcp_connect(const std::string& host, std::uint16_t port,
                                        std::chrono::milliseconds timeout);

}  // namespace quotecast
