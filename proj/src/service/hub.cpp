#include "chatlearn/service/hub.hpp"

#include "chatlearn/error.hpp"

namespace chatlearn::service {

namespace {

std::string require_string(const nlohmann::ordered_json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_string()) {
    throw Error(Errc::protocol_error, std::string("payload needs string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::uint64_t require_id(const nlohmann::ordered_json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_number_integer() ||
      (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
    throw Error(Errc::protocol_error, std::string("payload needs a non-negative integer field '") + key + "'");
  }
  return it->get<std::uint64_t>();
}

nlohmann::ordered_json entry_view(const review::ExpressionEntry& e) {
  auto j = e.to_json();
  j.erase("embedding");
  return j;
}

nlohmann::ordered_json cards_json(const std::vector<review::ReviewCard>& cards) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : cards) arr.push_back(c.to_json());
  return arr;
}

}  // namespace

void Hub::handle_text(const std::shared_ptr<Peer>& peer, std::string_view raw) {
  WireFrame frame;
  try {
    frame = decode(raw);
  } catch (const Error& e) {
    WireFrame unknown;
    unknown.type = "unknown";
    peer->send(make_error(unknown, to_string(e.code()), e.what()));
    return;
  }
  handle(peer, frame);
}

void Hub::handle(const std::shared_ptr<Peer>& peer, const WireFrame& frame) {
  if (frame.type == "hello") {
    hello(peer, frame);
    return;
  }
  std::optional<Binding> who;
  {
    std::lock_guard lock(mu_);
    if (auto it = bindings_.find(peer.get()); it != bindings_.end()) who = it->second;
  }
  if (!who) {
    peer->send(make_error(frame, "protocol-error", "send hello first"));
    return;
  }
  if (frame.session_token != who->token) {
    peer->send(make_error(frame, "protocol-error", "frame token does not match this connection"));
    return;
  }
  if (frame.type == "error" || frame.type == "ack") {
    peer->send(make_error(frame, "protocol-error", "'" + frame.type + "' frames are sent by the server only"));
    return;
  }
  auto rt = registry_.find(who->token);
  if (!rt) {
    peer->send(make_error(frame, "unknown-session", "session vanished"));
    return;
  }
  std::lock_guard turn(rt->turn_mutex());
  try {
    dispatch(peer, *who, *rt, frame);
  } catch (const Error& e) {
    peer->send(make_error(frame, to_string(e.code()), e.what()));
  } catch (const std::exception& e) {
    peer->send(make_error(frame, "internal", e.what()));
  }
}

void Hub::hello(const std::shared_ptr<Peer>& peer, const WireFrame& frame) {
  try {
    core::Sender role;
    const auto role_name = require_string(frame.payload, "role");
    if (role_name == "NNS") {
      role = core::Sender::NNS;
    } else if (role_name == "NS") {
      role = core::Sender::NS;
    } else {
      throw Error(Errc::protocol_error, "role must be NNS or NS");
    }
    nlohmann::json overrides = nlohmann::json::object();
    if (auto it = frame.payload.find("config"); it != frame.payload.end()) {
      overrides = nlohmann::json::parse(it->dump());
    }

    {
      std::lock_guard lock(mu_);
      if (bindings_.contains(peer.get())) throw Error(Errc::protocol_error, "connection already joined");
      auto& seats = seats_[frame.session_token];
      auto& seat = role == core::Sender::NNS ? seats.nns : seats.ns;
      if (!seat.expired()) {
        peer->send(make_error(frame, "role-taken", "role " + role_name + " is already connected"));
        peer->close();
        return;
      }
    }

    auto rt = registry_.open(frame.session_token, overrides);

    {
      std::lock_guard lock(mu_);
      auto& seats = seats_[frame.session_token];
      auto& seat = role == core::Sender::NNS ? seats.nns : seats.ns;
      if (!seat.expired()) {
        peer->send(make_error(frame, "role-taken", "role " + role_name + " is already connected"));
        peer->close();
        return;
      }
      seat = peer;
      bindings_[peer.get()] = {frame.session_token, role};
    }

    nlohmann::ordered_json result;
    result["session_id"] = rt->session().id();
    result["role"] = role_name;
    result["condition"] = std::string(core::to_string(rt->session().config().condition));
    result["config"] = rt->session().config().to_json();
    result["state"] = std::string(core::to_string(rt->session().state()));
    result["messages"] = nlohmann::ordered_json::array();
    for (const auto& m : rt->session().messages()) result["messages"].push_back(m.to_json());
    peer->send(make_ack(frame, std::move(result)));
  } catch (const Error& e) {
    peer->send(make_error(frame, to_string(e.code()), e.what()));
  }
}

void Hub::dispatch(const std::shared_ptr<Peer>& peer, const Binding& who, SessionRuntime& rt,
                   const WireFrame& frame) {
  const auto& p = frame.payload;
  const auto& type = frame.type;

  if (type == "message") {
    std::optional<std::string> shown;
    if (auto it = p.find("shown_translation"); it != p.end() && it->is_string()) shown = it->get<std::string>();
    auto posted = rt.post_message(who.role, require_string(p, "text"), std::move(shown));
    peer->send(make_ack(frame, {{"message_id", posted.message.id}}));
    WireFrame relay;
    relay.type = "message";
    relay.session_token = who.token;
    relay.payload = posted.message.to_json();
    broadcast(who.token, relay);
    if (!posted.cards.empty()) push_cards(who.token, "context", posted.cards);
    return;
  }

  // Everything below is language support for the non-native speaker.
  if (who.role != core::Sender::NNS) {
    throw Error(Errc::feature_disabled, "'" + type + "' is available to the NNS participant only");
  }
  auto ctx = rt.context();

  if (type == "translate_full") {
    peer->send(make_ack(frame, engine_.comprehend_full(ctx, require_id(p, "message_id")).to_json()));
  } else if (type == "explore") {
    const auto e = engine_.explore_expression(ctx, require_id(p, "message_id"), require_string(p, "selection"));
    peer->send(make_ack(frame, e.to_json()));
  } else if (type == "build_expression") {
    const auto build = engine_.build_expression(ctx, require_string(p, "draft"));
    nlohmann::ordered_json result;
    result["translation"] = build.translation.to_json();
    result["mapping"] = build.mapping ? build.mapping->to_json() : nlohmann::ordered_json(nullptr);
    result["degraded"] = build.degraded;
    peer->send(make_ack(frame, std::move(result)));
    if (!build.cards.empty()) push_cards(who.token, "expression", build.cards);
  } else if (type == "cards") {
    peer->send(make_ack(frame, {{"pinned", cards_json(rt.store().pinned_cards())}}));
  } else if (type == "card_interact") {
    peer->send(make_ack(frame, entry_view(rt.store().record_interaction(require_id(p, "entry_id")))));
  } else if (type == "begin_recall") {
    rt.session().begin_recall();
    peer->send(make_ack(frame, {{"recall_test_seconds", rt.session().config().recall_test_seconds}}));
  } else if (type == "recall_submit") {
    const auto result = rt.submit_recall(metrics::RecallSubmission::from_json(nlohmann::json::parse(p.dump())));
    peer->send(make_ack(frame, result.to_json()));
  } else {
    throw Error(Errc::protocol_error, "unhandled frame type '" + type + "'");
  }
}

void Hub::broadcast(const std::string& token, const WireFrame& frame) {
  send_to(token, core::Sender::NNS, frame);
  send_to(token, core::Sender::NS, frame);
}

void Hub::send_to(const std::string& token, core::Sender role, const WireFrame& frame) {
  std::shared_ptr<Peer> target;
  {
    std::lock_guard lock(mu_);
    auto it = seats_.find(token);
    if (it == seats_.end()) return;
    target = (role == core::Sender::NNS ? it->second.nns : it->second.ns).lock();
  }
  if (target) target->send(frame);
}

void Hub::push_cards(const std::string& token, std::string_view trigger, const std::vector<review::ReviewCard>& cards) {
  WireFrame f;
  f.type = "cards";
  f.session_token = token;
  f.payload["trigger"] = std::string(trigger);
  f.payload["cards"] = cards_json(cards);
  send_to(token, core::Sender::NNS, f);
}

void Hub::disconnect(const Peer* peer) {
  std::lock_guard lock(mu_);
  auto it = bindings_.find(peer);
  if (it == bindings_.end()) return;
  auto& seats = seats_[it->second.token];
  auto& seat = it->second.role == core::Sender::NNS ? seats.nns : seats.ns;
  if (auto live = seat.lock(); !live || live.get() == peer) seat.reset();
  bindings_.erase(it);
}

void Hub::close_session(const std::string& token) {
  auto rt = registry_.find(token);
  if (!rt) throw Error(Errc::unknown_session, "no session '" + token + "'");
  std::lock_guard turn(rt->turn_mutex());
  if (rt->session().state() != core::SessionState::Closed) rt->session().close();
}

}  // namespace chatlearn::service
