"""
Tests for active modules: the wire format, serving, remote calls and the
three address discovery strategies.
"""
import random
import socket
import threading

import pytest

from termweb.actmod.discovery import (
    FileDiscovery, NameServerDiscovery, WebDiscovery, addr_file, discovery_from_spec, locate_filebased,
    parse_addr, publish_filebased, run_nameserver,
)
from termweb.actmod.phone_db import MODULE_NAME, NO_NAME, make_registry, response_term
from termweb.actmod.server import Registry, call_remote, import_stub, serve
from termweb.actmod.wire import (
    HEADER, Failure, GoalCall, ModuleAddress, RemoteError, Success, WireError, decode_outcome, encode_call,
    frame, outcome_term, read_frame,
)
from termweb.errors import BindFailed, ConnectFailed, LocateFailed, PublishFailed, RegistryFrozen
from termweb.terms import PLACEHOLDER, Atom, Compound, term_text


def echo_registry():
    registry = Registry("echo")
    counter = {"n": 0}

    @registry.export("echo", 2)
    def echo(value, _out):
        return (value, value)

    @registry.export("check", 1)
    def check(value):
        return value == Atom("yes")

    @registry.export("boom", 0)
    def boom():
        raise ValueError("no luck")

    @registry.export("bump", 1, mutating=True)
    def bump(_n):
        counter["n"] += 1
        return (counter["n"],)

    @registry.export("wrong", 1)
    def wrong(value):
        return "not a tuple"

    return registry


@pytest.fixture
def echo_module(settings):
    with serve(echo_registry(), settings=settings) as module:
        yield module


@pytest.fixture
def phone_module(settings, addr_dir):
    with serve(make_registry(), FileDiscovery(addr_dir), settings=settings) as module:
        yield module


def _random_arg(rng, depth=0):
    choice = rng.randrange(6 if depth < 3 else 4)
    if choice == 0:
        return rng.randint(-1000, 1000)
    if choice == 1:
        return "".join(rng.choice("ab \"'\\\né") for _ in range(rng.randrange(6)))
    if choice == 2:
        return Atom(rng.choice(["daniel", "x y", "Hello", "'"]))
    if choice == 3:
        return rng.choice([PLACEHOLDER, 2.5])
    if choice == 4:
        return [_random_arg(rng, depth + 1) for _ in range(rng.randrange(3))]
    return Compound(rng.choice(["b", "addr", "$"]), [_random_arg(rng, depth + 1) for _ in range(rng.randint(1, 2))])


class TestWire:
    def test_address_terms(self):
        addr = ModuleAddress(host="clip.dia.fi.upm.es", port=5001)
        assert term_text(addr.to_term()) == 'addr("clip.dia.fi.upm.es",5001)'
        assert ModuleAddress.from_term(addr.to_term()) == addr
        with pytest.raises(WireError):
            ModuleAddress.from_term(Compound("addr", ["h", 0]))
        with pytest.raises(WireError):
            ModuleAddress.from_term(Atom("addr"))

    def test_goal_text(self):
        assert encode_call(GoalCall(operation="response", args=("daniel", PLACEHOLDER))) == b'response("daniel",_)'
        assert encode_call(GoalCall(operation="boom")) == b"boom"

    def test_outcome_terms(self):
        assert term_text(outcome_term(Success(bindings=("a", 1)))) == 'success(["a",1])'
        assert term_text(outcome_term(Failure())) == "failure"
        assert term_text(outcome_term(RemoteError(message="x"))) == 'remote_error("x")'
        assert decode_outcome(b'success([1])') == Success(bindings=(1,))
        with pytest.raises(WireError):
            decode_outcome(b"maybe")

    def test_frame_header(self):
        assert frame(b"abc") == b"\x00\x00\x00\x03abc"


class TestRegistry:
    def test_outcomes(self):
        registry = echo_registry()
        assert registry.invoke(GoalCall(operation="echo", args=(1, PLACEHOLDER))) == Success(bindings=(1, 1))
        assert registry.invoke(GoalCall(operation="check", args=(Atom("yes"),))) == Success(bindings=(Atom("yes"),))
        assert registry.invoke(GoalCall(operation="check", args=(Atom("no"),))) == Failure()
        assert registry.invoke(GoalCall(operation="boom")) == RemoteError(message="ValueError: no luck")
        assert isinstance(registry.invoke(GoalCall(operation="wrong", args=(1,))), RemoteError)

    def test_unknown_operation(self):
        outcome = echo_registry().invoke(GoalCall(operation="echo", args=(1,)))
        assert outcome == RemoteError(message="unknown operation echo/1")

    def test_operations(self):
        assert make_registry().operations() == [("add_phone", 2), ("response", 2)]

    def test_empty_registry_cannot_serve(self, settings):
        with pytest.raises(BindFailed):
            serve(Registry("nothing"), settings=settings)

    def test_served_registry_is_frozen(self, settings):
        registry = echo_registry()
        registry.add("early", 0, lambda: True)
        with serve(registry, settings=settings) as module:
            assert registry.frozen
            with pytest.raises(RegistryFrozen):
                registry.add("late", 0, lambda: True)
            with pytest.raises(RegistryFrozen):
                registry.export("later", 0)(lambda: True)
            assert call_remote(module.address, GoalCall(operation="late"), settings=settings) == \
                RemoteError(message="unknown operation late/0")
            outcome = call_remote(module.address, GoalCall(operation="early"), settings=settings)
            assert outcome == Success(bindings=())


class TestPhoneDb:
    @pytest.mark.parametrize("name,phone", [("daniel", "336-7448"), ("manuel", "336-7435"),
                                            ("sacha", "543-5316"), ("zed", None)])
    def test_response(self, name, phone):
        outcome = make_registry().invoke(GoalCall(operation="response", args=(name, PLACEHOLDER)))
        assert outcome == Success(bindings=(name, response_term(name, phone)))

    def test_blank_name(self):
        outcome = make_registry().invoke(GoalCall(operation="response", args=("  ", PLACEHOLDER)))
        assert outcome.bindings[1] == NO_NAME

    def test_add_phone(self):
        registry = make_registry({})
        assert registry.invoke(GoalCall(operation="add_phone", args=(Atom("zed"), "555-0000"))).bindings
        outcome = registry.invoke(GoalCall(operation="response", args=("zed", PLACEHOLDER)))
        assert outcome.bindings[1] == response_term("zed", "555-0000")


class TestRemoteCalls:
    def test_remote_equals_in_process(self, echo_module, settings):
        registry = echo_registry()
        rng = random.Random(7)
        calls = [GoalCall(operation="echo", args=(_random_arg(rng), PLACEHOLDER)) for _ in range(100)]
        calls += [GoalCall(operation="check", args=(Atom("yes"),)), GoalCall(operation="check", args=(3,)),
                  GoalCall(operation="boom"), GoalCall(operation="missing", args=(1, 2))]
        for call in calls:
            assert call_remote(echo_module.address, call, settings=settings) == registry.invoke(call)

    def test_phone_db_remote_equals_in_process(self, phone_module, settings):
        registry = make_registry()
        for name in ("daniel", "manuel", "sacha", "zed", "", "O'Brien \"x\""):
            call = GoalCall(operation="response", args=(name, PLACEHOLDER))
            assert call_remote(phone_module.address, call, settings=settings) == registry.invoke(call)

    def test_concurrent_clients(self, echo_module, settings):
        failures = []

        def client(worker):
            for i in range(50):
                value = [worker, i, f"w{worker}"]
                outcome = call_remote(echo_module.address, ("echo", (value, PLACEHOLDER)), settings=settings)
                if outcome != Success(bindings=(value, value)):
                    failures.append((worker, i, outcome))

        threads = [threading.Thread(target=client, args=(w,)) for w in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert failures == []
        last = call_remote(echo_module.address, ("bump", (PLACEHOLDER,)), settings=settings)
        assert last == Success(bindings=(1,))

    def test_several_calls_on_one_connection(self, echo_module, settings):
        with socket.create_connection((echo_module.address.host, echo_module.address.port), timeout=5) as sock:
            for value in (1, 2, 3):
                sock.sendall(frame(encode_call(GoalCall(operation="echo", args=(value, PLACEHOLDER)))))
                assert decode_outcome(read_frame(sock, settings.rpc_max_frame)) == Success(bindings=(value, value))

    @pytest.mark.parametrize("payload", [b"f(", b"\xff\xfe", b"[1,2]", b""])
    def test_malformed_request(self, echo_module, settings, payload):
        with socket.create_connection((echo_module.address.host, echo_module.address.port), timeout=5) as sock:
            sock.sendall(frame(payload))
            outcome = decode_outcome(read_frame(sock, settings.rpc_max_frame))
        assert isinstance(outcome, RemoteError)
        assert outcome.message.startswith("malformed request")
        assert call_remote(echo_module.address, ("echo", (1, PLACEHOLDER)), settings=settings).bindings == (1, 1)

    def test_oversized_frame(self, echo_module, settings):
        with socket.create_connection((echo_module.address.host, echo_module.address.port), timeout=5) as sock:
            sock.sendall(HEADER.pack(settings.rpc_max_frame + 1))
            outcome = decode_outcome(read_frame(sock, settings.rpc_max_frame))
            assert isinstance(outcome, RemoteError)
            assert read_frame(sock, settings.rpc_max_frame) is None

    def test_nothing_listening(self, settings):
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
        with pytest.raises(ConnectFailed):
            call_remote(ModuleAddress(host="127.0.0.1", port=port), ("echo", (1, PLACEHOLDER)), settings=settings)


class TestFileDiscovery:
    def test_publish_and_locate(self, addr_dir):
        addr = ModuleAddress(host="localhost", port=4321)
        path = publish_filebased("phone_db", addr, addr_dir)
        assert path == addr_file(addr_dir, "phone_db")
        assert path.read_text() == "localhost 4321\n"
        assert locate_filebased("phone_db", addr_dir) == addr
        assert [p.name for p in addr_dir.iterdir()] == ["phone_db.addr"]

    def test_missing_module(self, addr_dir):
        with pytest.raises(LocateFailed):
            locate_filebased("nobody", addr_dir)

    def test_malformed_file(self, addr_dir):
        addr_file(addr_dir, "bad").write_text("just-a-host\n")
        with pytest.raises(LocateFailed):
            locate_filebased("bad", addr_dir)
        with pytest.raises(LocateFailed):
            parse_addr("h 70000", "bad")

    def test_unwritable_directory(self, tmp_path, settings):
        with pytest.raises(PublishFailed):
            publish_filebased("phone_db", ModuleAddress(host="h", port=1), tmp_path / "missing")
        with pytest.raises(PublishFailed):
            serve(make_registry(), FileDiscovery(tmp_path / "missing"), settings=settings)

    def test_serve_publishes(self, phone_module, addr_dir):
        assert FileDiscovery(addr_dir).locate(MODULE_NAME) == phone_module.address

    def test_stub_locates_again_after_restart(self, addr_dir, settings):
        discovery = FileDiscovery(addr_dir)
        stub = import_stub(MODULE_NAME, [("response", 2)], discovery, settings)
        with serve(make_registry(), discovery, settings=settings):
            assert stub.response("daniel", PLACEHOLDER).bindings[1] == response_term("daniel", "336-7448")
        with serve(make_registry({"daniel": "111-1111"}), discovery, settings=settings):
            assert stub.response("daniel", PLACEHOLDER).bindings[1] == response_term("daniel", "111-1111")

    def test_stub_rejects_unimported_operations(self, addr_dir, settings):
        stub = import_stub(MODULE_NAME, [("response", 2)], FileDiscovery(addr_dir), settings)
        with pytest.raises(AttributeError):
            stub.add_phone
        with pytest.raises(AttributeError):
            stub.call("response", "daniel")

    def test_stub_without_published_module(self, addr_dir, settings):
        stub = import_stub(MODULE_NAME, [("response", 2)], FileDiscovery(addr_dir), settings)
        with pytest.raises(LocateFailed):
            stub.response("daniel", PLACEHOLDER)


class TestNameServer:
    @pytest.fixture
    def nameserver(self, settings):
        with run_nameserver("127.0.0.1", 0, settings) as module:
            yield module

    def test_publish_and_locate(self, nameserver, settings):
        discovery = NameServerDiscovery(nameserver.address, settings)
        with serve(make_registry(), discovery, settings=settings) as module:
            assert discovery.locate(MODULE_NAME) == module.address
            stub = import_stub(MODULE_NAME, [("response", 2)], discovery, settings)
            assert stub.response("sacha", PLACEHOLDER).bindings[1] == response_term("sacha", "543-5316")

    def test_unregistered(self, nameserver, settings):
        with pytest.raises(LocateFailed) as info:
            NameServerDiscovery(nameserver.address, settings).locate("nobody")
        assert "not registered" in str(info.value)

    def test_register_checks_the_address(self, nameserver, settings):
        outcome = call_remote(nameserver.address, ("register", ("m", "junk")), settings=settings)
        assert isinstance(outcome, RemoteError)

    def test_name_server_down(self, settings):
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
        discovery = NameServerDiscovery(ModuleAddress(host="127.0.0.1", port=port), settings)
        with pytest.raises(PublishFailed):
            discovery.publish("m", ModuleAddress(host="h", port=1))
        with pytest.raises(LocateFailed):
            discovery.locate("m")


class TestWebDiscovery:
    def test_publish_and_locate(self, http_server, addr_dir, settings):
        http_server.addr_directory = str(addr_dir)
        discovery = WebDiscovery(http_server.url("/addr"), addr_dir, settings)
        with serve(make_registry(), discovery, settings=settings) as module:
            assert discovery.locate(MODULE_NAME) == module.address

    def test_not_posted(self, http_server, addr_dir, settings):
        http_server.addr_directory = str(addr_dir)
        with pytest.raises(LocateFailed):
            WebDiscovery(http_server.url("/addr"), settings=settings).locate("nobody")

    def test_publish_needs_a_directory(self, settings):
        with pytest.raises(PublishFailed):
            WebDiscovery("http://127.0.0.1:1/addr", settings=settings).publish("m", ModuleAddress(host="h", port=1))


class TestDiscoveryFromSpec:
    def test_file(self, addr_dir):
        assert discovery_from_spec(f"file:{addr_dir}").directory == addr_dir

    def test_nameserver(self, settings):
        default = discovery_from_spec("nameserver", settings)
        assert default.address == ModuleAddress(host=settings.nameserver_host, port=settings.nameserver_port)
        assert discovery_from_spec("nameserver:ns.example:7000", settings).address == \
            ModuleAddress(host="ns.example", port=7000)

    def test_web(self, addr_dir, settings):
        web = discovery_from_spec(f"web:http://h:8080/addr,{addr_dir}", settings)
        assert (web.base_url, web.directory) == ("http://h:8080/addr", addr_dir)
        assert discovery_from_spec("web:http://h/addr/", settings).directory is None

    def test_fixed_address(self):
        locate = discovery_from_spec("addr:localhost:5001")
        assert locate("anything") == ModuleAddress(host="localhost", port=5001)

    @pytest.mark.parametrize("spec", ["ldap:x", "nameserver:host:port", "addr:nohost"])
    def test_bad_specs(self, spec):
        with pytest.raises(ValueError):
            discovery_from_spec(spec)
