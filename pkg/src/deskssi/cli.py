"""desk-ssi: command-line front door for the desk-scale SSI demo.

Global --seed and --fixed-clock put every command on a deterministic
runtime (seeded key generation, frozen timestamps), which makes scenario
transcripts byte-identical across runs — handy for demos and tests.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .identity import SigningIdentity, generate_did
from .pki import CapacityError, capacity_report, format_capacity_table
from .registry import Registry, genesis_transactions, verify_file
from .scenarios import (
    ScenarioConfig,
    run_bench,
    run_login_scenario,
    run_pki_scenario,
)

_CONFIG_FIELDS = set(ScenarioConfig.__dataclass_fields__)


def _parse_seed(text: str) -> int | str:
    try:
        return int(text)
    except ValueError:
        return text


def _make_config(overrides: dict, **extra) -> ScenarioConfig:
    merged = {**overrides, **extra}
    try:
        return ScenarioConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"bad configuration: {exc}") from exc


@click.group()
@click.option("--seed", default=None, help="Deterministic RNG seed (int or text).")
@click.option(
    "--fixed-clock",
    type=float,
    default=None,
    help="Freeze all timestamps at this Unix time.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file with scenario settings (ports, ledger path, ...).",
)
@click.pass_context
def main(ctx, seed, fixed_clock, config_path):
    """Desk-scale self-sovereign identity: registry, agents, SSO, PKI."""
    overrides: dict = {}
    if config_path:
        data = json.loads(Path(config_path).read_text("utf-8"))
        if not isinstance(data, dict):
            raise click.UsageError("config file must hold a JSON object")
        unknown = sorted(set(data) - _CONFIG_FIELDS)
        if unknown:
            raise click.UsageError(f"unknown config keys: {', '.join(unknown)}")
        overrides.update(data)
    if seed is not None:
        overrides["seed"] = _parse_seed(seed)
    if fixed_clock is not None:
        overrides["fixed_clock"] = fixed_clock
    ctx.obj = overrides


@main.command()
@click.option(
    "--trustees", default=4, show_default=True, help="Founding trustee count."
)
@click.option(
    "--ledger",
    "ledger_path",
    default="ledger.jsonl",
    show_default=True,
    type=click.Path(dir_okay=False, writable=True),
)
@click.option(
    "--genesis",
    "genesis_path",
    default="genesis.jsonl",
    show_default=True,
    type=click.Path(dir_okay=False, writable=True),
)
@click.option("--force", is_flag=True, help="Overwrite existing files.")
@click.pass_context
def init(ctx, trustees, ledger_path, genesis_path, force):
    """Create a trustee-rooted ledger file plus its genesis anchor."""
    if trustees < 1:
        raise click.UsageError("--trustees must be at least 1")
    for path in (ledger_path, genesis_path):
        if Path(path).exists() and not force:
            raise click.ClickException(
                f"{path} already exists; pass --force to overwrite"
            )
    config = _make_config(ctx.obj)
    runtime = config.runtime()
    founders = []
    for index in range(trustees):
        did, keypair = generate_did(runtime=runtime)
        founders.append(
            (SigningIdentity(did=did.render(), keypair=keypair), f"trustee-{index}")
        )
    registry = Registry.from_transactions(
        genesis_transactions(founders, runtime=runtime),
        genesis_height=trustees,
        path=ledger_path,
        clock=runtime.now,
    )
    registry.save()
    registry.save_genesis(genesis_path)
    click.echo(f"LEDGER {ledger_path} height {registry.height}")
    click.echo(f"GENESIS {genesis_path} trustees {trustees}")
    for identity, alias in founders:
        click.echo(f"TRUSTEE {alias} {identity.did}")


@main.command("verify-chain")
@click.option(
    "--ledger",
    "ledger_path",
    default="ledger.jsonl",
    show_default=True,
    type=click.Path(exists=True, dir_okay=False),
)
@click.pass_context
def verify_chain_cmd(ctx, ledger_path):
    """Audit a ledger file byte-for-byte; report the first broken txn."""
    verdict = verify_file(ledger_path)
    if verdict:
        click.echo("CHAIN OK")
        ctx.exit(0)
    click.echo(f"CHAIN BROKEN seq_no={verdict.seq_no} reason={verdict.reason}")
    ctx.exit(1)


@main.group()
def scenario():
    """End-to-end demo narratives with STEP-by-STEP transcripts."""


@scenario.command("login")
@click.option(
    "--flow",
    type=click.Choice(["implicit", "code"]),
    default="implicit",
    show_default=True,
)
@click.option("--deny", is_flag=True, help="Holder declines consent (exit 3).")
@click.option(
    "--hold",
    is_flag=True,
    help="After issuance, keep services running for a browser walkthrough.",
)
@click.option(
    "--http",
    "over_http",
    is_flag=True,
    help="Serve every party on real localhost ports instead of in-process.",
)
@click.pass_context
def scenario_login(ctx, flow, deny, hold, over_http):
    """Credential issuance followed by an SSI login at the demo site."""
    config = _make_config(ctx.obj, http=over_http or hold)
    ctx.exit(run_login_scenario(config, flow=flow, deny=deny, hold=hold, out=click.echo))


@scenario.command("pki")
@click.pass_context
def scenario_pki(ctx):
    """CA setup, domain certificate issuance, revocation, re-issuance."""
    config = _make_config(ctx.obj)
    ctx.exit(run_pki_scenario(config, out=click.echo))


@main.command()
@click.argument("certs", type=int)
@click.argument("days", type=float)
@click.argument("tps", type=float)
def capacity(certs, days, tps):
    """Ledger capacity arithmetic: CERTS renewed every DAYS at TPS."""
    try:
        report = capacity_report(certs, days, tps)
    except CapacityError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(format_capacity_table(report))


@main.command()
@click.argument("n", type=int)
@click.pass_context
def bench(ctx, n):
    """Append N identity transactions, then audit the whole chain."""
    if n < 1:
        raise click.UsageError("N must be at least 1")
    config = _make_config(ctx.obj)
    ctx.exit(run_bench(config, n, out=click.echo))


if __name__ == "__main__":
    main()
