"""Turn a parsed script into an EncodedPolicy and sanity-check it against a platform."""

from __future__ import annotations

from typing import Optional

from .model import (
    DEFAULT_TAG,
    STAR,
    Block,
    CapacityUsed,
    Configuration,
    Diagnostic,
    EncodedPolicy,
    Registry,
    Strategy,
)
from .parser import AffinityOpt, RawBlock, ScriptAst, TagDecl, format_script

DEFAULT_BLOCK = Block(STAR, Strategy.ANY, (CapacityUsed(100),), (), ())


def encode_block(raw: RawBlock) -> Block:
    affinity = raw.affinity or ()
    return Block(
        workers=raw.workers,
        strategy=raw.strategy if raw.strategy is not None else Strategy.ANY,
        invalidate=raw.invalidate if raw.invalidate is not None else (CapacityUsed(100),),
        affine=tuple(o.tag for o in affinity if not o.negated),
        anti_affine=tuple(o.tag for o in affinity if o.negated),
    )


def encode(ast: ScriptAst, diagnostics: Optional[list[Diagnostic]] = None) -> EncodedPolicy:
    """Resolve followups, fill in defaults and split affinity options.

    Tags keep their order of appearance with ``default`` last. A missing
    ``default`` tag is synthesized as ``workers: *``. Non-fatal findings (an
    explicit ``default`` asking to follow up on itself) are appended to
    ``diagnostics`` when given.
    """
    default_decl: Optional[TagDecl] = None
    for t in ast.tags:
        if t.name == DEFAULT_TAG:
            default_decl = t
    if default_decl is None:
        default_blocks: tuple[Block, ...] = (DEFAULT_BLOCK,)
    else:
        if default_decl.followup == "default" and diagnostics is not None:
            diagnostics.append(
                Diagnostic("WARN", "DefaultFollowupRewritten", "followup of the default tag forced to fail", DEFAULT_TAG)
            )
        default_blocks = tuple(encode_block(b) for b in default_decl.blocks)

    policies: dict[str, tuple[Block, ...]] = {}
    for t in ast.tags:
        if t.name == DEFAULT_TAG:
            continue
        own = tuple(encode_block(b) for b in t.blocks)
        policies[t.name] = own if t.followup == "fail" else own + default_blocks
    policies[DEFAULT_TAG] = default_blocks
    return EncodedPolicy(policies)


def _raw_from_block(b: Block) -> RawBlock:
    affinity = tuple(AffinityOpt(t) for t in b.affine) + tuple(AffinityOpt(t, True) for t in b.anti_affine)
    return RawBlock(b.workers, b.strategy, b.invalidate, affinity or None)


def decode(p: EncodedPolicy) -> ScriptAst:
    """A script whose encoding is exactly ``p`` (every tag gets ``followup: fail``)."""
    decls = []
    for tag, blocks in p.items():
        decls.append(TagDecl(tag, tuple(_raw_from_block(b) for b in blocks), "fail"))
    return ScriptAst(tuple(decls))


def format_policy(p: EncodedPolicy) -> str:
    return format_script(decode(p))


def validate(p: EncodedPolicy, reg: Registry, C: Configuration) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    known_tags = reg.tags()
    for tag, blocks in p.items():
        for i, b in enumerate(blocks):
            where = f"{tag} block {i}"
            if b.workers is not STAR:
                for w in b.workers:
                    if w not in C:
                        diags.append(Diagnostic("ERROR", "UnknownWorkerInBlock", f"{where} names unknown worker {w}", w))
            for t in b.affine + b.anti_affine:
                if t not in known_tags:
                    diags.append(Diagnostic("WARN", "UnknownAffinityTag", f"{where} mentions tag {t} used by no function", t))
            for t in set(b.affine) & set(b.anti_affine):
                diags.append(Diagnostic("WARN", "UnsatisfiableBlock", f"{where} is both affine and anti-affine to {t}", t))
    for t in sorted(known_tags):
        if t not in p:
            diags.append(Diagnostic("ERROR", "UntaggedFunction", f"tag {t} has no policy", t))
    if len(C):
        biggest = max(s.max for s in C.values())
        for f, info in reg.items():
            if info.occupancy > biggest:
                diags.append(Diagnostic("WARN", "FunctionFitsNowhere", f"{f} needs {info.occupancy} units, no worker has that many", f))
    # followup unfolding copies default blocks into many tags; report each finding once
    unique, seen = [], set()
    for d in diags:
        if (d.code, d.subject) not in seen:
            seen.add((d.code, d.subject))
            unique.append(d)
    return unique


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == "ERROR" for d in diags)
