#include "quotecast/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace quotecast {

namespace {

std::string errno_string(const char* what) {
    return std::string(what) + ": " + std::strerror(errno);
}

class TcpStream final : public ByteStream {
public:
    explicit TcpStream(int fd) : fd_(fd) {}
    ~TcpStream() override { close(); }

    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    std::size_t read_some(char* out, std::size_t n,
                          std::chrono::milliseconds timeout) override {
        if (fd_ < 0) throw IoError("read on closed stream");
        pollfd pfd{fd_, POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
        if (rc < 0) throw IoError(errno_string("poll"));
        if (rc == 0) return 0;
        ssize_t got = ::recv(fd_, out, n, 0);
        if (got < 0) throw IoError(errno_string("recv"));
        if (got == 0) throw IoError("connection closed by peer");
        return static_cast<std::size_t>(got);
    }

    void write_all(std::string_view data) override {
        if (fd_ < 0) throw IoError("write on closed stream");
        const char* p = data.data();
        std::size_t left = data.size();
        while (left > 0) {
            ssize_t sent = ::send(fd_, p, left, MSG_NOSIGNAL);
            if (sent < 0) {
                if (errno == EINTR) continue;
                throw IoError(errno_string("send"));
            }
            p += sent;
            left -= static_cast<std::size_t>(sent);
        }
    }

    void close() override {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_;
};

}  // namespace

std::unique_ptr<ByteStream> tcp_connect(const std::string& host, std::uint16_t port,
                                        std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port_str = std::to_string(port);
    int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res);
    if (rc != 0) throw ConnectError(std::string("resolve ") + host + ": " + gai_strerror(rc));

    std::string last_error = "no addresses";
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, SOCK_STREAM | SOCK_NONBLOCK, 0);
        if (fd < 0) {
            last_error = errno_string("socket");
            continue;
        }
        rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
            if (rc == 0) {
                ::close(fd);
                last_error = "connect timed out";
                continue;
            }
            int soerr = 0;
            socklen_t len = sizeof(soerr);
            ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &soerr, &len);
            rc = (soerr == 0) ? 0 : -1;
            errno = soerr;
        }
        if (rc != 0) {
            last_error = errno_string("connect");
            ::close(fd);
            continue;
        }
        // Back to blocking mode; per-read timeouts use poll().
        int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        ::freeaddrinfo(res);
        return std::make_unique<TcpStream>(fd);
    }
    ::freeaddrinfo(res);
    throw ConnectError("connect to " + host + ":" + port_str + " failed: " + last_error);
}

}  // namespace quotecast
