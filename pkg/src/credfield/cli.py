"""Operator command line.

Flows (``enrol``, ``login``, ``change``) drive the client agent against
either an in-process server backed by a store file or a remote service
(``--server URL``). Passwords come from the environment
(``CREDFIELD_PASSWORD``, ``CREDFIELD_NEW_PASSWORD``) or an interactive
prompt, never from argv. The store path defaults to ``CREDFIELD_STORE``.

Exit codes: 0 success, 1 operational failure (rejects, unexpected attack
outcomes, harness errors), 2 usage errors.
"""

from __future__ import annotations

import argparse
import getpass
import json
import os
import sys

from . import agent, attacks, bench
from .core import KdfParams, canonical_origin
from .errors import CredFieldError
from .server import AuthServer, CredentialStore, PolicyMode, ServerConfig
from .wire import measure_sizes

DEFAULT_STORE = "credstore.txt"
DEFAULT_ORIGIN = "https://bank.example"
DEFAULT_PROFILE = os.path.join("~", ".credfield", "profile.json")

PASSWORD_ENV = "CREDFIELD_PASSWORD"
NEW_PASSWORD_ENV = "CREDFIELD_NEW_PASSWORD"
STORE_ENV = "CREDFIELD_STORE"


def _store_path(args) -> str:
    return args.store or os.environ.get(STORE_ENV) or DEFAULT_STORE


def _server_config(args) -> ServerConfig:
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as handle:
            return ServerConfig.from_json(json.load(handle))
    return ServerConfig(
        origin=canonical_origin(args.origin),
        delta=args.delta,
        skew=args.server_skew,
        challenge_ttl=args.ttl,
        kdf=KdfParams(iterations=args.iterations),
        policy=PolicyMode.by_name(args.policy),
    )


def _password(prompt: str, env_var: str = PASSWORD_ENV) -> str:
    value = os.environ.get(env_var)
    if value:
        return value
    return getpass.getpass(prompt)


def _make_transport(args):
    if args.server:
        return agent.HttpTransport(args.server), None
    config = _server_config(args)
    path = _store_path(args)
    auth_server = AuthServer.load(config, path)
    return agent.InProcessTransport(auth_server), (auth_server, path)


def _open_profile(args) -> agent.AgentProfile:
    profile = agent.open_profile(os.path.expanduser(args.profile))
    profile.clock_skew = args.skew
    if args.spoof_origin:
        profile.perceived_origin_override = canonical_origin(args.spoof_origin)
    return profile


def _finish(decision, persist) -> int:
    if persist is not None:
        auth_server, path = persist
        auth_server.persist(path)
    if decision.accepted:
        print(f"Accept (browser_known={decision.browser_known})")
        return 0
    print(decision.code())
    return 1


def cmd_enrol(args) -> int:
    transport, persist = _make_transport(args)
    profile = _open_profile(args)
    password = _password("Password: ")
    repeat = os.environ.get(PASSWORD_ENV) or password
    if not os.environ.get(PASSWORD_ENV):
        repeat = getpass.getpass("Repeat password: ")
    decision = agent.enrol_flow(
        profile, transport, canonical_origin(args.origin), args.user, password, repeat,
        KdfParams(iterations=args.iterations),
    )
    return _finish(decision, persist)


def cmd_login(args) -> int:
    transport, persist = _make_transport(args)
    profile = _open_profile(args)
    password = _password("Password: ")
    decision = agent.login(
        profile, transport, canonical_origin(args.origin), args.user, password,
        KdfParams(iterations=args.iterations),
    )
    return _finish(decision, persist)


def cmd_change(args) -> int:
    transport, persist = _make_transport(args)
    profile = _open_profile(args)
    old_password = _password("Current password: ")
    new_password = _password("New password: ", NEW_PASSWORD_ENV)
    decision = agent.change_flow(
        profile, transport, canonical_origin(args.origin), args.user,
        old_password, new_password, KdfParams(iterations=args.iterations),
    )
    return _finish(decision, persist)


def cmd_serve(args) -> int:
    from . import service

    config = _server_config(args)
    path = _store_path(args)
    auth_server = AuthServer.load(config, path)
    print(f"serving {config.origin} on http://{args.host}:{args.port} (store: {path})")
    service.serve(
        auth_server,
        host=args.host,
        port=args.port,
        store_path=path,
        assets_dir=args.assets,
    )
    return 0


def cmd_attack(args) -> int:
    if args.scenario == "all":
        reports = attacks.run_all()
    else:
        try:
            sid = attacks.ScenarioId(args.scenario)
        except ValueError:
            print(f"unknown scenario {args.scenario!r}; one of: "
                  + ", ".join(s.value for s in attacks.ScenarioId) + ", all",
                  file=sys.stderr)
            return 2
        if sid is attacks.ScenarioId.ENROLMENT_SUBSTITUTION:
            reports = [
                attacks.run_scenario(attacks.Scenario(sid, {"transport_integrity": flag}))
                for flag in (False, True)
            ]
        else:
            reports = [attacks.run_scenario(attacks.Scenario(sid))]

    ok = True
    header = f"{'scenario':<24} {'attempts':>8} {'successes':>9} {'blocked':>8} {'expected':>8}"
    print(header)
    print("-" * len(header))
    for report in reports:
        expected = attacks.expected_blocked(report)
        ok = ok and (report.blocked == expected)
        print(
            f"{report.id.value:<24} {report.attempts:>8} "
            f"{report.successes_by_adversary:>9} {str(report.blocked):>8} "
            f"{str(expected):>8}"
        )
        print(f"    {report.notes}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            json.dump([r.to_json() for r in reports], handle, indent=2)
        print(f"report written to {args.json}")
    print("result:", "OK" if ok else "UNEXPECTED OUTCOME")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    kdf = KdfParams(iterations=args.iterations)
    if args.protocol == "both":
        comparison = bench.run_comparison(n=args.n, kdf=kdf)
        print(bench.format_table(comparison))
        if args.json:
            with open(args.json, "w", encoding="utf-8") as handle:
                json.dump(comparison, handle, indent=2)
        return 0
    protocol = (
        bench.Protocol.PROPOSED if args.protocol == "proposed"
        else bench.Protocol.HASHED_PASSWORD
    )
    report = bench.run_bench(bench.BenchConfig(n=args.n, protocol=protocol, kdf=kdf))
    print(json.dumps(report.to_json(), indent=2))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            json.dump(report.to_json(), handle, indent=2)
    return 0


def cmd_store_inspect(args) -> int:
    path = _store_path(args)
    store = CredentialStore.load(path)
    sizes = measure_sizes()
    print(f"store: {path}")
    print(f"users: {len(store.users)}")
    for user in store.users.values():
        print(
            f"  {user.user_id}: p_p={user.p_p.hex()[:16]}… "
            f"browsers={len(user.browsers)} created={user.created_at}"
        )
        for entry in user.browsers:
            print(
                f"    browser {entry.p_b.hex()[:16]}… logins={entry.login_count} "
                f"first={entry.first_seen} last={entry.last_seen}"
            )
    print(f"blacklist entries: {len(store.blacklist)}")
    print(f"policy events: {len(store.events)}")
    for event in store.events[-10:]:
        print(f"  {event.kind.value} user={event.user_id} p_b={event.p_b.hex()[:16]}… at={event.at}")
    print(
        f"reference sizes: transmission={sizes.transmission_bytes} B "
        f"(paper {sizes.reference_transmission_bytes} B), "
        f"storage/user={sizes.storage_bytes_per_user} B "
        f"(paper {sizes.reference_storage_bytes} B)"
    )
    return 0


def cmd_blacklist(args) -> int:
    path = _store_path(args)
    store = CredentialStore.load(path)
    if args.action == "add":
        if len(args.identifier or "") != 128:
            print("blacklist add expects a 64-byte hex browser identifier", file=sys.stderr)
            return 2
        store.blacklist.add(bytes.fromhex(args.identifier))
        store.save(path)
        print("added")
        return 0
    for entry in sorted(store.blacklist):
        print(entry.hex())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="credfield", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server_opts(p):
        p.add_argument("--store", help=f"store file (default ${STORE_ENV} or {DEFAULT_STORE})")
        p.add_argument("--config", help="server config JSON file")
        p.add_argument("--origin", default=DEFAULT_ORIGIN, help="canonical server origin")
        p.add_argument("--policy", default="HighSecurity",
                       choices=["HighSecurity", "Enterprise", "Personal"])
        p.add_argument("--delta", type=int, default=120, help="max credential age (s)")
        p.add_argument("--server-skew", type=int, default=30, help="max forward clock skew (s)")
        p.add_argument("--ttl", type=int, default=300, help="challenge lifetime (s)")
        p.add_argument("--iterations", type=int, default=1000, help="PBKDF2 iterations")

    def add_client_opts(p):
        add_server_opts(p)
        p.add_argument("--server", help="remote service URL (otherwise in-process)")
        p.add_argument("--profile", default=DEFAULT_PROFILE, help="browser profile path")
        p.add_argument("--user", required=True)
        p.add_argument("--skew", type=int, default=0, help="agent clock skew knob (s)")
        p.add_argument("--spoof-origin", help="derive under this origin instead (attack knob)")

    p = sub.add_parser("serve", help="run the HTTP service")
    add_server_opts(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8437)
    p.add_argument("--assets", help="static demo assets directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("enrol", help="enrol a user")
    add_client_opts(p)
    p.set_defaults(func=cmd_enrol)

    p = sub.add_parser("login", help="verify a password")
    add_client_opts(p)
    p.set_defaults(func=cmd_login)

    p = sub.add_parser("change", help="change a password")
    add_client_opts(p)
    p.set_defaults(func=cmd_change)

    p = sub.add_parser("attack", help="run abuse-case scenarios")
    p.add_argument("scenario", nargs="?", default="all")
    p.add_argument("--json", help="write a machine-readable report here")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("bench", help="benchmark against the hashed-password baseline")
    p.add_argument("protocol", nargs="?", default="both",
                   choices=["both", "proposed", "hashed"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--json", help="write a machine-readable report here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("store", help="store maintenance")
    store_sub = p.add_subparsers(dest="store_command", required=True)
    p2 = store_sub.add_parser("inspect", help="summarize the credential store")
    p2.add_argument("--store")
    p2.set_defaults(func=cmd_store_inspect)

    p = sub.add_parser("blacklist", help="manage the browser blacklist")
    p.add_argument("action", choices=["add", "list"])
    p.add_argument("identifier", nargs="?", help="64-byte hex browser identifier")
    p.add_argument("--store")
    p.set_defaults(func=cmd_blacklist)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CredFieldError, ValueError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
