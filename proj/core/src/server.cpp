#include "aprl/server.hpp"

#include <poll.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "aprl/errors.hpp"

namespace aprl {

RolloutServer::RolloutServer(const ServerConfig& config)
    : config_(config), listener_(TcpListener::bind(config.bind_address, config.port)) {}

void RolloutServer::poll_connections(int timeout_ms) {
  if (auto stream = listener_.accept(timeout_ms)) handle_hello(std::move(*stream));
  while (auto stream = listener_.accept(0)) handle_hello(std::move(*stream));
}

void RolloutServer::handle_hello(TcpStream stream) {
  DecodeError error;
  const std::optional<Message> hello_msg = read_message(stream, error);
  if (!hello_msg || !std::holds_alternative<ClientHello>(*hello_msg)) {
    std::fprintf(stderr, "[server] dropped connection during hello (%s)\n",
                 to_string(error));
    return;
  }
  const ClientHello hello = std::get<ClientHello>(*hello_msg);
  if (hello.protocol_version != kProtocolVersion) {
    write_message(stream, HelloReject{RejectReason::ProtocolVersion,
                                      "unsupported protocol version"});
    return;
  }
  if (hello.obs_layout_version != config_.obs_layout_version) {
    write_message(stream, HelloReject{RejectReason::ObsLayoutVersion,
                                      "observation layout version mismatch"});
    return;
  }
  if (clients_.contains(hello.client_id)) {
    write_message(stream, HelloReject{RejectReason::DuplicateClientId,
                                      "client id already connected"});
    return;
  }
  if (!write_message(stream, HelloAccept{hello.client_id})) return;
  Client client;
  client.stream = std::move(stream);
  client.num_processes = hello.num_processes;
  client.agents_per_process = hello.agents_per_process;
  clients_.emplace(hello.client_id, std::move(client));
  had_clients_ = true;
  std::fprintf(stderr, "[server] client %llu connected (%u x %u agents)\n",
               static_cast<unsigned long long>(hello.client_id), hello.num_processes,
               hello.agents_per_process);
}

void RolloutServer::drop_client(std::uint64_t client_id, const std::string& reason) {
  std::fprintf(stderr, "[server] client %llu dropped: %s\n",
               static_cast<unsigned long long>(client_id), reason.c_str());
  clients_.erase(client_id);
}

bool RolloutServer::gather(UploadMap& uploads) {
  uploads.clear();
  auto last_heartbeat = std::chrono::steady_clock::now();

  for (;;) {
    if (stop_requested()) return false;
    poll_connections();

    if (clients_.empty()) {
      if (had_clients_) return false;  // everyone left: the feed is over
      if (!wait_for_clients_) return true;
      const auto now = std::chrono::steady_clock::now();
      if (std::chrono::duration<double>(now - last_heartbeat).count() >=
          config_.heartbeat_period_s) {
        std::fprintf(stderr, "[server] waiting for clients on %s:%u\n",
                     config_.bind_address.c_str(), listener_.port());
        last_heartbeat = now;
      }
      pollfd pfd{listener_.fd(), POLLIN, 0};
      ::poll(&pfd, 1, config_.poll_timeout_ms);
      continue;
    }

    bool all_ready = true;
    for (auto& [id, client] : clients_) {
      if (!client.has_upload) {
        all_ready = false;
        break;
      }
    }
    if (all_ready) {
      for (auto& [id, client] : clients_) {
        std::vector<StepRecord> records = std::move(client.upload.records);
        client.has_upload = false;
        client.expected_tick += 1;
        uploads.emplace(id, std::move(records));
      }
      return true;
    }

    // wait for any pending socket, then read exactly one frame from each
    std::vector<pollfd> fds;
    std::vector<std::uint64_t> ids;
    fds.push_back({listener_.fd(), POLLIN, 0});
    ids.push_back(0);
    for (auto& [id, client] : clients_) {
      if (!client.has_upload) {
        fds.push_back({client.stream.fd(), POLLIN, 0});
        ids.push_back(id);
      }
    }
    if (::poll(fds.data(), fds.size(), config_.poll_timeout_ms) < 0) continue;

    for (std::size_t i = 1; i < fds.size(); ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const std::uint64_t id = ids[i];
      auto it = clients_.find(id);
      if (it == clients_.end()) continue;
      Client& client = it->second;

      DecodeError error;
      std::optional<Message> message = read_message(client.stream, error);
      if (!message) {
        drop_client(id, error == DecodeError::None ? "connection closed"
                                                   : to_string(error));
        continue;
      }
      if (std::holds_alternative<Bye>(*message)) {
        drop_client(id, "bye");
        continue;
      }
      auto* upload = std::get_if<StepUpload>(message ? &*message : nullptr);
      if (!upload) {
        drop_client(id, "unexpected message type");
        continue;
      }
      if (upload->client_id != id) {
        drop_client(id, "client id mismatch in upload");
        continue;
      }
      if (upload->obs_len != config_.expected_obs_len) {
        drop_client(id, "observation length mismatch");
        continue;
      }
      if (upload->tick != client.expected_tick) {
        std::fprintf(stderr,
                     "[server] client %llu: stale upload tick %llu (expected %llu), discarded\n",
                     static_cast<unsigned long long>(id),
                     static_cast<unsigned long long>(upload->tick),
                     static_cast<unsigned long long>(client.expected_tick));
        continue;
      }
      client.upload = std::move(*upload);
      client.has_upload = true;
    }
  }
}

void RolloutServer::send_actions(const ActionMap& actions) {
  for (const auto& [id, records] : actions) {
    auto it = clients_.find(id);
    if (it == clients_.end()) continue;
    ActionDownload download;
    download.client_id = id;
    download.tick = it->second.expected_tick - 1;  // echoes the gathered tick
    download.records = records;
    if (!write_message(it->second.stream, download))
      drop_client(id, "send failed");
  }
}

}  // namespace aprl
