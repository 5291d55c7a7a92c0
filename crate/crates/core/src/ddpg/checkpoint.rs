//! Whole-agent checkpoints.
//!
//! Everything a training run needs to continue — configuration, progress
//! counters, RNG positions, noise state, the four networks, and both
//! optimisers — goes into one little-endian binary blob. The configuration
//! is embedded as its canonical TOML together with its SHA-256, so a
//! checkpoint is self-describing: loading needs no side-channel config, and
//! tampering with the embedded text is detected.
//!
//! The replay buffer is deliberately **not** persisted (it would dwarf the
//! rest of the file a thousandfold); a resumed run re-collects experience
//! and re-applies the warmup rule before its first gradient update.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::AgentConfig;
use super::noise::ExplorationNoise;
use super::replay::ReplayBuffer;
use super::Agent;
use crate::error::{AgentError, NetError};
use crate::nn::checkpoint::{
    read_exact_or_truncated, read_f64_vec, read_magic, read_net, read_u128, read_u16, read_u32,
    read_u64, write_f64_slice, write_net, write_u128, write_u16, write_u32, write_u64,
};
use crate::nn::checkpoint::{read_adam, write_adam};

pub const AGENT_MAGIC: [u8; 4] = *b"GRLA";
pub const AGENT_VERSION: u16 = 1;

fn write_rng<W: Write>(w: &mut W, rng: &ChaCha8Rng) -> std::io::Result<()> {
    w.write_all(&rng.get_seed())?;
    write_u64(w, rng.get_stream())?;
    write_u128(w, rng.get_word_pos())
}

fn read_rng<R: Read>(r: &mut R) -> Result<ChaCha8Rng, NetError> {
    let mut seed = [0u8; 32];
    read_exact_or_truncated(r, &mut seed)?;
    let stream = read_u64(r)?;
    let word_pos = read_u128(r)?;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(word_pos);
    Ok(rng)
}

/// Serialise the agent. The replay buffer is skipped by design.
pub fn write_agent<W: Write>(agent: &Agent, w: &mut W) -> Result<(), NetError> {
    w.write_all(&AGENT_MAGIC)?;
    write_u16(w, AGENT_VERSION)?;

    let config_toml = agent.config.canonical_toml();
    write_u32(w, config_toml.len() as u32)?;
    w.write_all(config_toml.as_bytes())?;
    w.write_all(&agent.config.hash_bytes())?;

    write_u64(w, agent.env_steps_total)?;
    write_u64(w, agent.episodes_total)?;
    write_u64(w, agent.iterations_done)?;

    write_rng(w, &agent.noise_rng)?;
    write_rng(w, &agent.sample_rng)?;

    write_u32(w, agent.noise.state().len() as u32)?;
    write_f64_slice(w, agent.noise.state())?;

    write_net(&agent.actor, w)?;
    write_net(&agent.critic, w)?;
    write_net(&agent.target_actor, w)?;
    write_net(&agent.target_critic, w)?;
    write_adam(&agent.actor_opt, w)?;
    write_adam(&agent.critic_opt, w)?;
    Ok(())
}

/// Rebuild an agent from a checkpoint, verifying the embedded config text
/// against its stored fingerprint and every stored dimension against the
/// config. The replay buffer comes back empty.
pub fn read_agent<R: Read>(r: &mut R) -> Result<Agent, AgentError> {
    read_magic(r, AGENT_MAGIC).map_err(AgentError::Net)?;
    let version = read_u16(r)?;
    if version != AGENT_VERSION {
        return Err(AgentError::Net(NetError::BadVersion(version)));
    }

    let toml_len = read_u32(r)? as usize;
    let mut toml_bytes = vec![0u8; toml_len];
    read_exact_or_truncated(r, &mut toml_bytes)?;
    let mut stored_hash = [0u8; 32];
    read_exact_or_truncated(r, &mut stored_hash)?;

    let recomputed: [u8; 32] = Sha256::digest(&toml_bytes).into();
    if recomputed != stored_hash {
        return Err(AgentError::ConfigMismatch {
            stored: hex(&stored_hash),
            current: hex(&recomputed),
        });
    }
    let config_text = String::from_utf8(toml_bytes)
        .map_err(|e| AgentError::BadConfig(format!("embedded config is not UTF-8: {e}")))?;
    let config: AgentConfig = toml::from_str(&config_text)
        .map_err(|e| AgentError::BadConfig(format!("embedded config does not parse: {e}")))?;
    config.validate()?;

    let env_steps_total = read_u64(r)?;
    let episodes_total = read_u64(r)?;
    let iterations_done = read_u64(r)?;

    let noise_rng = read_rng(r)?;
    let sample_rng = read_rng(r)?;

    let noise_len = read_u32(r)? as usize;
    if noise_len != config.action_dim {
        return Err(AgentError::DimMismatch(format!(
            "stored noise state has width {noise_len}, config says {}",
            config.action_dim
        )));
    }
    let noise_state = read_f64_vec(r, noise_len)?;
    let mut noise = ExplorationNoise::new(config.noise, config.action_dim);
    noise.set_state(noise_state);

    let actor = read_net(r)?;
    let critic = read_net(r)?;
    let target_actor = read_net(r)?;
    let target_critic = read_net(r)?;

    let mut expected_actor = vec![config.observation_dim];
    expected_actor.extend_from_slice(&config.actor_hidden);
    expected_actor.push(config.action_dim);
    let mut expected_critic = vec![config.observation_dim + config.action_dim];
    expected_critic.extend_from_slice(&config.critic_hidden);
    expected_critic.push(1);
    for (net, expected, name) in [
        (&actor, &expected_actor, "actor"),
        (&target_actor, &expected_actor, "target actor"),
        (&critic, &expected_critic, "critic"),
        (&target_critic, &expected_critic, "target critic"),
    ] {
        if &net.dims() != expected {
            return Err(AgentError::DimMismatch(format!(
                "stored {name} has layer widths {:?}, config implies {expected:?}",
                net.dims()
            )));
        }
    }

    let actor_opt = read_adam(r)?;
    let critic_opt = read_adam(r)?;
    for (opt, net, name) in [(&actor_opt, &actor, "actor"), (&critic_opt, &critic, "critic")] {
        if opt.moments.len() != net.layers().len()
            || opt
                .moments
                .iter()
                .zip(net.layers())
                .any(|(m, l)| m.weights_m.dim() != l.weights.dim())
        {
            return Err(AgentError::DimMismatch(format!(
                "stored {name} optimiser moments do not match the network"
            )));
        }
    }

    let replay = ReplayBuffer::new(config.replay_capacity);
    Ok(Agent {
        config,
        actor,
        critic,
        target_actor,
        target_critic,
        actor_opt,
        critic_opt,
        replay,
        noise,
        noise_rng,
        sample_rng,
        env_steps_total,
        episodes_total,
        iterations_done,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddpg::config::{NoiseConfig, NoiseKind};
    use crate::ddpg::replay::Transition;
    use crate::ddpg::UpdateStatus;
    use rand::Rng;

    fn config() -> AgentConfig {
        AgentConfig {
            observation_dim: 3,
            action_dim: 2,
            actor_hidden: vec![8],
            critic_hidden: vec![8, 8],
            actor_learning_rate: 1.0e-3,
            critic_learning_rate: 1.0e-2,
            discount: 0.97,
            soft_update_tau: 0.01,
            minibatch: 16,
            replay_capacity: 512,
            warmup_steps: 32,
            samples_per_iteration: 50,
            update_every: 1,
            noise: NoiseConfig {
                kind: NoiseKind::OrnsteinUhlenbeck,
                theta: 0.15,
                sigma_initial: 0.2,
                sigma_final: 0.05,
                anneal_steps: 500,
            },
        }
    }

    /// An agent part-way through training, with live optimiser moments,
    /// a mid-episode OU state, and advanced RNG positions.
    fn trained_agent() -> Agent {
        let mut agent = Agent::new(config(), 42).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for step in 0..120 {
            let s: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = agent.act_exploring(&s).unwrap();
            let r = -s[0] * s[0] - a.iter().map(|x| x * x).sum::<f64>();
            agent
                .observe_transition(Transition {
                    state: s.clone(),
                    action: a,
                    reward: r,
                    next_state: s,
                    done: step % 10 == 9,
                })
                .unwrap();
            agent.update().unwrap();
        }
        agent
    }

    fn to_blob(agent: &Agent) -> Vec<u8> {
        let mut blob = Vec::new();
        write_agent(agent, &mut blob).unwrap();
        blob
    }

    #[test]
    fn round_trip_restores_everything_bit_for_bit() {
        let agent = trained_agent();
        assert!(agent.noise.state().iter().any(|&x| x != 0.0), "OU state should be live");

        let blob = to_blob(&agent);
        let loaded = read_agent(&mut blob.as_slice()).unwrap();

        assert_eq!(loaded.config, agent.config);
        assert_eq!(loaded.env_steps_total, 120);
        assert_eq!(loaded.episodes_total, agent.episodes_total);
        assert_eq!(loaded.iterations_done, agent.iterations_done);

        let bits = |v: Vec<f64>| v.into_iter().map(f64::to_bits).collect::<Vec<_>>();
        assert_eq!(bits(loaded.actor.params_flat()), bits(agent.actor.params_flat()));
        assert_eq!(bits(loaded.critic.params_flat()), bits(agent.critic.params_flat()));
        assert_eq!(
            bits(loaded.target_actor.params_flat()),
            bits(agent.target_actor.params_flat())
        );
        assert_eq!(
            bits(loaded.target_critic.params_flat()),
            bits(agent.target_critic.params_flat())
        );

        assert_eq!(loaded.actor_opt.t, agent.actor_opt.t);
        assert_eq!(loaded.critic_opt.t, agent.critic_opt.t);
        for (lm, am) in loaded.critic_opt.moments.iter().zip(&agent.critic_opt.moments) {
            assert_eq!(lm.weights_m, am.weights_m);
            assert_eq!(lm.weights_v, am.weights_v);
            assert_eq!(lm.bias_m, am.bias_m);
            assert_eq!(lm.bias_v, am.bias_v);
        }

        let noise_bits =
            |s: &[f64]| s.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(noise_bits(loaded.noise.state()), noise_bits(agent.noise.state()));

        // RNG streams resume exactly where they stopped.
        assert_eq!(loaded.noise_rng.get_seed(), agent.noise_rng.get_seed());
        assert_eq!(loaded.noise_rng.get_stream(), agent.noise_rng.get_stream());
        assert_eq!(loaded.noise_rng.get_word_pos(), agent.noise_rng.get_word_pos());
        assert_eq!(loaded.sample_rng.get_word_pos(), agent.sample_rng.get_word_pos());
    }

    #[test]
    fn rewriting_a_loaded_agent_is_byte_identical() {
        let agent = trained_agent();
        let blob = to_blob(&agent);
        let loaded = read_agent(&mut blob.as_slice()).unwrap();
        assert_eq!(to_blob(&loaded), blob);
    }

    #[test]
    fn replay_buffer_is_not_persisted() {
        let agent = trained_agent();
        assert!(agent.replay.len() > 0);
        let blob = to_blob(&agent);
        let mut loaded = read_agent(&mut blob.as_slice()).unwrap();
        assert_eq!(loaded.replay.len(), 0);
        // And the warmup rule applies afresh.
        assert!(matches!(
            loaded.update().unwrap(),
            UpdateStatus::WarmingUp { collected: 0, required: 32 }
        ));
    }

    #[test]
    fn tampered_config_text_is_detected() {
        let agent = trained_agent();
        let mut blob = to_blob(&agent);
        // Layout: magic(4) version(2) len(4) toml... — flip a config byte.
        blob[12] ^= 0x01;
        assert!(matches!(
            read_agent(&mut blob.as_slice()),
            Err(AgentError::ConfigMismatch { .. })
        ));
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        let agent = trained_agent();
        let mut blob = to_blob(&agent);
        blob[0] = b'X';
        assert!(matches!(
            read_agent(&mut blob.as_slice()),
            Err(AgentError::Net(NetError::BadMagic))
        ));

        let mut blob = to_blob(&agent);
        blob[4] = 9;
        blob[5] = 0;
        assert!(matches!(
            read_agent(&mut blob.as_slice()),
            Err(AgentError::Net(NetError::BadVersion(9)))
        ));
    }

    #[test]
    fn truncation_is_reported_not_panicked() {
        let agent = trained_agent();
        let blob = to_blob(&agent);
        for cut in [2, 8, 40, blob.len() / 2, blob.len() - 1] {
            match read_agent(&mut blob[..cut].to_vec().as_slice()) {
                Err(AgentError::Net(NetError::Truncated)) => {}
                other => panic!("cut at {cut}: expected Truncated, got {other:?}"),
            }
        }
    }

    #[test]
    fn verify_config_guards_resumption() {
        let agent = trained_agent();
        let blob = to_blob(&agent);
        let loaded = read_agent(&mut blob.as_slice()).unwrap();
        loaded.verify_config(&config()).unwrap();
        let mut other = config();
        other.discount = 0.5;
        assert!(matches!(
            loaded.verify_config(&other),
            Err(AgentError::ConfigMismatch { .. })
        ));
    }
}
