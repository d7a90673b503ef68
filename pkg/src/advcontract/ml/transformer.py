"""Small transformer-encoder classifier over PSCFT token sequences."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from advcontract.ml.vocab import PAD, TokenVocabulary, build_vocab


@dataclass(frozen=True)
class TransformerConfig:
    d_model: int = 64
    heads: int = 4
    layers: int = 2
    ff_mult: int = 2
    dropout: float = 0.1
    max_len: int = 512
    epochs: int = 8
    patience: int = 3
    min_delta: float = 1e-4  # smallest validation-loss drop that counts as improvement
    batch_size: int = 32
    lr: float = 1e-3
    weight_decay: float = 0.0
    min_frequency: int = 1
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TransformerConfig":
        return cls(**d)


def sinusoidal_table(length: int, d_model: int) -> torch.Tensor:
    pos = torch.arange(length, dtype=torch.float64)[:, None]
    i = torch.arange(0, d_model, 2, dtype=torch.float64)
    angle = pos / torch.pow(10000.0, i / d_model)
    pe = torch.zeros(length, d_model, dtype=torch.float64)
    pe[:, 0::2] = torch.sin(angle)
    pe[:, 1::2] = torch.cos(angle[:, : d_model // 2])
    return pe


class EncoderLayer(nn.Module):
    """Post-norm encoder layer: fused scaled-dot-product self-attention with a
    key padding mask, then a ReLU feed-forward block. Dropout acts on the two
    sublayer outputs and the hidden activations, not on attention weights."""

    def __init__(self, d_model: int, heads: int, d_ff: int, dropout: float):
        super().__init__()
        if d_model % heads:
            raise ValueError("d_model must be divisible by heads")
        self.heads = heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.proj = nn.Linear(d_model, d_model)
        self.ff1 = nn.Linear(d_model, d_ff)
        self.ff2 = nn.Linear(d_ff, d_model)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.drop = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, keep: torch.Tensor) -> torch.Tensor:
        """x (B, L, D); keep (B, L) is True at real tokens."""
        b, n, d = x.shape
        q, k, v = self.qkv(x).view(b, n, 3, self.heads, d // self.heads).permute(2, 0, 3, 1, 4)
        a = nn.functional.scaled_dot_product_attention(q, k, v, attn_mask=keep[:, None, None, :])
        a = a.transpose(1, 2).reshape(b, n, d)
        x = self.norm1(x + self.drop(self.proj(a)))
        h = self.ff2(self.drop(torch.relu(self.ff1(x))))
        return self.norm2(x + self.drop(h))


class EncoderClassifier(nn.Module):
    """Learned token embeddings + fixed sinusoidal positions, N post-norm encoder
    layers with padding-masked attention, mean pooling over real tokens, linear head."""

    def __init__(self, vocab_size: int, cfg: TransformerConfig):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Embedding(vocab_size, cfg.d_model, padding_idx=PAD)
        self.register_buffer("pos", sinusoidal_table(cfg.max_len, cfg.d_model).float(), persistent=False)
        self.layers = nn.ModuleList(
            EncoderLayer(cfg.d_model, cfg.heads, cfg.ff_mult * cfg.d_model, cfg.dropout) for _ in range(cfg.layers)
        )
        self.head = nn.Linear(cfg.d_model, 1)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        """ids (B, L) -> logits (B,)."""
        keep = ids != PAD
        x = self.embed(ids) * math.sqrt(self.cfg.d_model) + self.pos[: ids.shape[1]].to(self.embed.weight.dtype)
        for layer in self.layers:
            x = layer(x, keep)
        w = keep.to(x.dtype)[..., None]
        pooled = (x * w).sum(1) / w.sum(1).clamp(min=1.0)
        return self.head(pooled).squeeze(-1)


class TransformerClassifier:
    kind = "TRANSFORMER"

    def __init__(self, vocab: TokenVocabulary, cfg: TransformerConfig, module: EncoderClassifier | None = None):
        self.vocab, self.cfg = vocab, cfg
        self.module = module if module is not None else EncoderClassifier(len(vocab), cfg)
        self.history: list[dict] = []

    def ids(self, docs) -> torch.Tensor:
        return torch.from_numpy(self.vocab.batch(list(docs), self.cfg.max_len))

    @torch.no_grad()
    def predict_proba(self, docs, batch_size: int = 64) -> np.ndarray:
        self.module.eval()
        seqs = [self.vocab.encode(d, self.cfg.max_len) for d in docs]
        # length-sorted batches keep padding (and attention cost) low
        order = sorted(range(len(seqs)), key=lambda i: (len(seqs[i]), i))
        out = np.zeros(len(seqs))
        for s in range(0, len(order), batch_size):
            idx = order[s : s + batch_size]
            out[idx] = torch.sigmoid(self.module(_pad([seqs[i] for i in idx]))).double().numpy()
        return out

    def predict(self, docs, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(docs) >= threshold).astype(np.int64)

    def get_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        arrays = {k: v.detach().cpu().numpy() for k, v in self.module.state_dict().items()}
        return {"config": self.cfg.to_dict(), "vocab": self.vocab.to_dict()}, arrays

    @classmethod
    def from_state(cls, config: dict, arrays: dict[str, np.ndarray]) -> "TransformerClassifier":
        cfg = TransformerConfig.from_dict(config["config"])
        vocab = TokenVocabulary.from_dict(config["vocab"])
        m = cls(vocab, cfg)
        m.module.load_state_dict({k: torch.from_numpy(np.ascontiguousarray(v)) for k, v in arrays.items()})
        m.module.eval()
        return m


def _pad(seqs: list[list[int]]) -> torch.Tensor:
    ids = torch.full((len(seqs), max(len(q) for q in seqs)), PAD, dtype=torch.long)
    for r, q in enumerate(seqs):
        ids[r, : len(q)] = torch.tensor(q, dtype=torch.long)
    return ids


def _batches(lengths: list[int], size: int, gen: torch.Generator, pool: int = 8):
    """Shuffle, sort by length inside pools of `pool` batches, shuffle batch order."""
    perm = torch.randperm(len(lengths), generator=gen).tolist()
    batches = []
    for p in range(0, len(perm), size * pool):
        chunk = sorted(perm[p : p + size * pool], key=lambda i: lengths[i])
        batches += [chunk[s : s + size] for s in range(0, len(chunk), size)]
    for b in torch.randperm(len(batches), generator=gen).tolist():
        yield batches[b]


def _mean_loss(model: TransformerClassifier, docs: list, y: np.ndarray) -> float:
    p = np.clip(model.predict_proba(docs), 1e-7, 1 - 1e-7)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def train_transformer(
    train_docs,
    train_labels,
    valid_docs,
    valid_labels,
    cfg: TransformerConfig = TransformerConfig(),
    vocab: TokenVocabulary | None = None,
) -> TransformerClassifier:
    """Adam on binary cross-entropy; stops after `patience` epochs without a
    validation-loss improvement of at least `min_delta` (or after `epochs`)
    and returns the best-validation weights."""
    train_docs, valid_docs = list(train_docs), list(valid_docs)
    y = np.asarray(train_labels, dtype=np.float64)
    yv = np.asarray(valid_labels, dtype=np.float64)
    if len(np.unique(y)) < 2:
        raise ValueError("transformer training data holds a single class")
    torch.manual_seed(cfg.seed)
    vocab = vocab if vocab is not None else build_vocab(train_docs, cfg.min_frequency)
    model = TransformerClassifier(vocab, cfg)
    net = model.module
    opt = torch.optim.Adam(net.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    gen = torch.Generator().manual_seed(cfg.seed)
    # encode once; length-bucketed batches are padded to their own longest row
    seqs = [vocab.encode(d, cfg.max_len) for d in train_docs]
    lengths = [len(q) for q in seqs]
    yt = torch.tensor(y, dtype=torch.float32)
    best_loss, best_state, stale = math.inf, None, 0
    for epoch in range(cfg.epochs):
        net.train()
        total = 0.0
        for idx in _batches(lengths, cfg.batch_size, gen):
            ids = _pad([seqs[i] for i in idx])
            loss = nn.functional.binary_cross_entropy_with_logits(net(ids), yt[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        vloss = _mean_loss(model, valid_docs, yv) if valid_docs else total / len(seqs)
        model.history.append({"epoch": epoch, "train_loss": total / len(seqs), "valid_loss": vloss})
        if vloss < best_loss - cfg.min_delta or best_state is None:
            best_loss, stale = vloss, 0
            best_state = {k: v.detach().clone() for k, v in net.state_dict().items()}
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    net.load_state_dict(best_state)
    net.eval()
    return model
