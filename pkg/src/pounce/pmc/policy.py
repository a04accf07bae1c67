"""Encoder-quantizer-decoder primitive motor controller.

The encoder reads proprioception plus future targets and emits a latent
that is vector-quantized against the codebook; the decoder reads only
proprioception and the quantized code, so all future-target information
must pass through the discrete bottleneck.
"""

from __future__ import annotations

import numpy as np

from .. import vq as vqmod
from ..nn import GaussianHead, MLP, Tensor, no_grad
from ..sim.config import N_JOINTS
from .obs import FUTURE_DIM, PROPRIO_DIM

ENCODER_HIDDEN = [256, 256]
DECODER_HIDDEN = [128, 256, 256]
VALUE_HIDDEN = [256, 256]
INIT_LOG_STD = np.log(0.15)


class PmcPolicy:
    def __init__(self, rng: np.random.Generator, n_codes: int = vqmod.DEFAULT_CODES,
                 code_dim: int = vqmod.DEFAULT_DIM, beta: float = vqmod.DEFAULT_BETA,
                 vq_loss_weight: float = 0.1):
        self.encoder = MLP(rng, PROPRIO_DIM + FUTURE_DIM, ENCODER_HIDDEN,
                           code_dim, out_gain=1.0)
        self.codebook = vqmod.Codebook(rng, n_codes, code_dim)
        self.decoder = MLP(rng, PROPRIO_DIM + code_dim, DECODER_HIDDEN,
                           N_JOINTS, out_gain=0.01)
        self.value = MLP(rng, PROPRIO_DIM + FUTURE_DIM, VALUE_HIDDEN, 1, out_gain=1.0)
        self.log_std = Tensor(np.full(N_JOINTS, INIT_LOG_STD), requires_grad=True)
        self.beta = beta
        # weight of the two VQ terms inside the PPO objective; unit weight
        # collapses the codebook at this scale (see decisions ledger)
        self.vq_loss_weight = vq_loss_weight
        self.frozen_prefixes = ()

    # -- parameter plumbing ----------------------------------------------------

    def named_parameters(self):
        for n, p in self.encoder.named_parameters():
            yield f"pmc/encoder/{n}", p
        yield "pmc/codebook/embeddings", self.codebook.embeddings
        for n, p in self.decoder.named_parameters():
            yield f"pmc/decoder/{n}", p
        for n, p in self.value.named_parameters():
            yield f"pmc/value/{n}", p
        yield "pmc/log_std", self.log_std

    def state_arrays(self):
        out = {name: p.data.copy() for name, p in self.named_parameters()}
        # usage counters ride along so later stages can see the code prior
        out["pmc/codebook/usage"] = self.codebook.usage.astype(np.float64)
        return out

    def load_arrays(self, arrays):
        mine = dict(self.named_parameters())
        for name, p in mine.items():
            src = np.asarray(arrays[name], dtype=np.float64)
            if src.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}")
            p.data = src.copy()
        if "pmc/codebook/usage" in arrays:
            self.codebook.usage = np.asarray(
                arrays["pmc/codebook/usage"]).astype(np.int64)

    # -- inference ----------------------------------------------------------------

    def act(self, proprio: np.ndarray, future: np.ndarray,
            rng: np.random.Generator, deterministic: bool = False):
        """Rollout path. Returns (actions, code indices, log_probs, values)."""
        with no_grad():
            z_e = self.encoder(Tensor(np.concatenate([proprio, future], axis=1)))
            idx, z_q = vqmod.quantize(z_e.data, self.codebook)
            mean = self.decoder(Tensor(np.concatenate([proprio, z_q], axis=1)))
            head = GaussianHead(mean, self.log_std)
            if not np.all(np.isfinite(mean.data)):
                raise FloatingPointError("non-finite policy output")
            actions = head.mode() if deterministic else head.sample(rng)
            log_probs = head.log_prob(actions).data
            values = self.value(Tensor(np.concatenate([proprio, future], axis=1)))
        return actions, idx, log_probs, values.data[:, 0]

    # -- training ------------------------------------------------------------------

    def evaluate(self, obs: dict, actions: np.ndarray):
        """Gradient path for PPO; aux loss carries the two VQ terms."""
        enc_in = Tensor(np.concatenate([obs["proprio"], obs["future"]], axis=1))
        z_e = self.encoder(enc_in)
        idx, z_q = vqmod.quantize(z_e.data, self.codebook, count_usage=False)
        bridged = vqmod.straight_through(z_e, z_q)
        dec_in = Tensor(np.asarray(obs["proprio"]))
        from ..nn import concat
        mean = self.decoder(concat([dec_in, bridged], axis=1))
        head = GaussianHead(mean, self.log_std)
        log_probs = head.log_prob(actions)
        values = self.value(enc_in).reshape(-1)
        codebook_loss, commitment_loss = vqmod.vq_losses(
            z_e, self.codebook, idx, beta=self.beta)
        aux = self.vq_loss_weight * (codebook_loss + commitment_loss)
        return log_probs, values, head.entropy(), aux
