//! Stochastic self-assembly of the actin nanowire.
//!
//! Free monomers diffuse ballistically inside a box, collide as hard
//! spheres, and stick to the growing chain tip when the geometric
//! attachment conditions hold. A magnetic field tightens the lateral
//! corridor the chain is allowed to wander in.

use crate::error::{Error, Result};
use crate::vec3::Vec3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy)]
pub struct Particle {
    pub id: usize,
    pub position: Vec3,
    pub velocity: Vec3,
    pub radius: f64,
    pub mass: f64,
    pub stuck: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SimBox {
    pub min_corner: Vec3,
    pub max_corner: Vec3,
}

impl SimBox {
    pub fn new(min_corner: Vec3, max_corner: Vec3) -> Result<Self> {
        if !(min_corner.x < max_corner.x
            && min_corner.y < max_corner.y
            && min_corner.z < max_corner.z)
        {
            return Err(Error::invalid("box min_corner must be < max_corner"));
        }
        Ok(SimBox {
            min_corner,
            max_corner,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AssemblyConfig {
    pub particle_count: usize,
    pub particle_radius: f64,
    pub speed_scale: f64,
    /// Dimensionless magnetic field strength B >= 0. Zero disables the
    /// lateral alignment gate.
    pub magnetic_field: f64,
    /// Maximum attachment angle from the transmitter->receiver axis, degrees.
    pub attach_angle_max: f64,
    pub frame_dt: f64,
    pub max_time: f64,
    pub seed: u64,
    pub sim_box: SimBox,
    pub transmitter_pos: Vec3,
    pub receiver_pos: Vec3,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            particle_count: 150,
            particle_radius: 0.25,
            speed_scale: 5.0,
            magnetic_field: 0.0,
            attach_angle_max: 60.0,
            frame_dt: 0.01,
            max_time: 240.0,
            seed: 1,
            sim_box: SimBox {
                min_corner: Vec3::ZERO,
                max_corner: Vec3::new(6.0, 6.0, 6.0),
            },
            transmitter_pos: Vec3::new(0.5, 3.0, 3.0),
            receiver_pos: Vec3::new(5.5, 3.0, 3.0),
        }
    }
}

impl AssemblyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particle_count < 1 {
            return Err(Error::invalid("particle_count must be >= 1"));
        }
        if self.frame_dt <= 0.0 || self.max_time <= 0.0 {
            return Err(Error::invalid("frame_dt and max_time must be > 0"));
        }
        if self.particle_radius <= 0.0 {
            return Err(Error::invalid("particle_radius must be > 0"));
        }
        if !(self.attach_angle_max > 0.0 && self.attach_angle_max <= 180.0) {
            return Err(Error::invalid("attach_angle_max must be in (0, 180]"));
        }
        if self.magnetic_field < 0.0 {
            return Err(Error::invalid("magnetic_field must be >= 0"));
        }
        Ok(())
    }

    /// Lateral corridor half-width: the chain may only grow while its
    /// transverse offset stays below z_half / (1 + B).
    pub fn lateral_limit(&self) -> f64 {
        let z_half = (self.sim_box.max_corner.z - self.sim_box.min_corner.z) / 2.0;
        z_half / (1.0 + self.magnetic_field)
    }
}

#[derive(Debug, Clone)]
pub struct NanowireState {
    /// Particle ids, first entry is the transmitter anchor.
    pub chain: Vec<usize>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample {
    pub time: f64,
    pub tip_position: Vec3,
    pub chain_length: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthTrace {
    pub samples: Vec<GrowthSample>,
}

/// Free flight plus specular wall reflection over one interval.
/// Stuck particles never move.
pub fn advance_frame(particles: &mut [Particle], sim_box: &SimBox, dt: f64) {
    debug_assert!(dt > 0.0);
    for p in particles.iter_mut() {
        if p.stuck {
            continue;
        }
        p.position += p.velocity * dt;
        reflect_walls(p, sim_box);
    }
}

fn reflect_walls(p: &mut Particle, sim_box: &SimBox) {
    // Mirror overshoot back inside; repeat in case of multiple bounces.
    for _ in 0..16 {
        let mut bounced = false;
        for axis in 0..3 {
            let (pos, vel, lo, hi) = match axis {
                0 => (
                    &mut p.position.x,
                    &mut p.velocity.x,
                    sim_box.min_corner.x,
                    sim_box.max_corner.x,
                ),
                1 => (
                    &mut p.position.y,
                    &mut p.velocity.y,
                    sim_box.min_corner.y,
                    sim_box.max_corner.y,
                ),
                _ => (
                    &mut p.position.z,
                    &mut p.velocity.z,
                    sim_box.min_corner.z,
                    sim_box.max_corner.z,
                ),
            };
            if *pos < lo {
                *pos = 2.0 * lo - *pos;
                *vel = vel.abs();
                bounced = true;
            } else if *pos > hi {
                *pos = 2.0 * hi - *pos;
                *vel = -vel.abs();
                bounced = true;
            }
        }
        if !bounced {
            return;
        }
    }
}

/// True iff the center distance is currently shrinking.
pub fn approaching(a: &Particle, b: &Particle) -> bool {
    let dp = a.position - b.position;
    let dv = a.velocity - b.velocity;
    dp.dot(dv) < 0.0
}

/// True iff the spheres overlap or touch.
pub fn interfere(a: &Particle, b: &Particle) -> bool {
    let dp = a.position - b.position;
    dp.norm_sq() <= (a.radius + b.radius).powi(2)
}

/// Earliest t > 0 at which the spheres come into contact under free
/// flight, if any.
pub fn predict_collision_time(a: &Particle, b: &Particle) -> Option<f64> {
    let dp = a.position - b.position;
    let dv = a.velocity - b.velocity;
    let sum_r = a.radius + b.radius;
    let qa = dv.norm_sq();
    let qb = 2.0 * dp.dot(dv);
    let qc = dp.norm_sq() - sum_r * sum_r;
    if qa == 0.0 {
        return None; // constant separation
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let t = (-qb - sqrt_disc) / (2.0 * qa);
    if t > 0.0 {
        Some(t)
    } else {
        None
    }
}

/// Hard-sphere elastic collision along the center line. Conserves total
/// momentum and kinetic energy.
pub fn resolve_elastic_collision(a: &Particle, b: &Particle) -> Result<(Particle, Particle)> {
    let dp = b.position - a.position;
    let dist_sq = dp.norm_sq();
    if dist_sq == 0.0 {
        return Err(Error::invalid(
            "coincident particle centers: collision normal undefined",
        ));
    }
    let normal = dp * (1.0 / dist_sq.sqrt());
    let rel_v = a.velocity - b.velocity;
    let vn = rel_v.dot(normal);
    let mut a2 = *a;
    let mut b2 = *b;
    if vn <= 0.0 {
        // Separating or grazing along the normal: nothing to exchange.
        return Ok((a2, b2));
    }
    let m_sum = a.mass + b.mass;
    let impulse = 2.0 * vn / m_sum;
    a2.velocity = a.velocity - normal * (impulse * b.mass);
    b2.velocity = b.velocity + normal * (impulse * a.mass);
    Ok((a2, b2))
}

/// Reflect a free particle off an immovable (stuck) one.
fn bounce_off_stuck(free: &mut Particle, stuck: &Particle) {
    let dp = free.position - stuck.position;
    let n2 = dp.norm_sq();
    if n2 == 0.0 {
        return;
    }
    let normal = dp * (1.0 / n2.sqrt());
    let vn = free.velocity.dot(normal);
    if vn < 0.0 {
        free.velocity = free.velocity - normal * (2.0 * vn);
    }
}

/// Attachment decision for a monomer that just collided with the chain tip.
pub fn try_attach(
    state: &mut NanowireState,
    particles: &mut [Particle],
    m_id: usize,
    config: &AssemblyConfig,
) -> bool {
    let tip_id = *state.chain.last().expect("chain has an anchor");
    let tip_pos = particles[tip_id].position;
    let m_pos = particles[m_id].position;
    let axis = (config.receiver_pos - config.transmitter_pos).normalized();

    // (ii) attachment cone around the transmitter->receiver axis
    let bond = m_pos - tip_pos;
    let bond_norm = bond.norm();
    if bond_norm == 0.0 {
        return false;
    }
    let cos_angle = bond.dot(axis) / bond_norm;
    let cos_max = (config.attach_angle_max.to_radians()).cos();
    if cos_angle < cos_max {
        return false;
    }

    // (iii) strictly forward along the axis and closer to the receiver
    let proj_m = (m_pos - config.transmitter_pos).dot(axis);
    let proj_tip = (tip_pos - config.transmitter_pos).dot(axis);
    if proj_m <= proj_tip {
        return false;
    }
    if (m_pos - config.receiver_pos).norm() >= (tip_pos - config.receiver_pos).norm() {
        return false;
    }

    // (iv) lateral corridor, gated only when the field is on
    if config.magnetic_field > 0.0 {
        let lateral = (m_pos - config.transmitter_pos) - axis * proj_m;
        let limit = config.lateral_limit();
        if lateral.y.abs() >= limit || lateral.z.abs() >= limit {
            return false;
        }
    }

    particles[m_id].velocity = Vec3::ZERO;
    particles[m_id].stuck = true;
    state.chain.push(m_id);
    true
}

struct PendingEvent {
    time: f64,
    i: usize,
    j: usize,
}

/// Runs the full assembly simulation. Deterministic per (config, seed).
pub fn run_assembly(config: &AssemblyConfig) -> Result<(NanowireState, GrowthTrace)> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut particles = seed_particles(config, &mut rng);
    let mut state = NanowireState {
        chain: vec![0],
        complete: false,
    };
    let mut trace = GrowthTrace::default();
    let capture_radius = 2.0 * config.particle_radius;

    let n_frames = (config.max_time / config.frame_dt).ceil() as usize;
    for frame in 0..n_frames {
        step_frame(&mut particles, &mut state, config)?;
        let t = (frame + 1) as f64 * config.frame_dt;
        let tip = particles[*state.chain.last().unwrap()].position;
        trace.samples.push(GrowthSample {
            time: t,
            tip_position: tip,
            chain_length: state.chain.len(),
        });
        if (tip - config.receiver_pos).norm() <= capture_radius {
            state.complete = true;
            break;
        }
    }
    Ok((state, trace))
}

fn seed_particles(config: &AssemblyConfig, rng: &mut ChaCha12Rng) -> Vec<Particle> {
    let r = config.particle_radius;
    let sb = &config.sim_box;
    let mut particles = vec![Particle {
        id: 0,
        position: config.transmitter_pos,
        velocity: Vec3::ZERO,
        radius: r,
        mass: 1.0,
        stuck: true,
    }];
    for id in 1..=config.particle_count {
        let mut pos = Vec3::ZERO;
        for _ in 0..256 {
            pos = Vec3::new(
                rng.random_range(sb.min_corner.x + r..sb.max_corner.x - r),
                rng.random_range(sb.min_corner.y + r..sb.max_corner.y - r),
                rng.random_range(sb.min_corner.z + r..sb.max_corner.z - r),
            );
            if particles
                .iter()
                .all(|p| (p.position - pos).norm() > 2.0 * r)
            {
                break;
            }
        }
        // isotropic direction, speed uniform in [0.5, 1.5] * speed_scale
        let dir = loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n2 = v.norm_sq();
            if n2 > 1e-6 && n2 <= 1.0 {
                break v * (1.0 / n2.sqrt());
            }
        };
        let speed = config.speed_scale * rng.random_range(0.5..1.5);
        particles.push(Particle {
            id,
            position: pos,
            velocity: dir * speed,
            radius: r,
            mass: 1.0,
            stuck: false,
        });
    }
    particles
}

/// Advances one frame, handling collisions at their predicted instants
/// in time order (PIT + PIC sub-stepping).
fn step_frame(
    particles: &mut [Particle],
    state: &mut NanowireState,
    config: &AssemblyConfig,
) -> Result<()> {
    let mut remaining = config.frame_dt;
    let max_events = 64 * particles.len();
    for _ in 0..max_events {
        let Some(ev) = earliest_event(particles, remaining) else {
            break;
        };
        advance_frame(particles, &config.sim_box, ev.time);
        remaining -= ev.time;
        handle_contact(particles, state, config, ev.i, ev.j)?;
        if remaining <= 0.0 {
            return Ok(());
        }
    }
    if remaining > 0.0 {
        advance_frame(particles, &config.sim_box, remaining);
    }
    Ok(())
}

fn earliest_event(particles: &[Particle], horizon: f64) -> Option<PendingEvent> {
    let mut best: Option<PendingEvent> = None;
    for i in 0..particles.len() {
        for j in (i + 1)..particles.len() {
            let (a, b) = (&particles[i], &particles[j]);
            if a.stuck && b.stuck {
                continue;
            }
            if !approaching(a, b) {
                continue;
            }
            if let Some(t) = predict_collision_time(a, b) {
                if t <= horizon {
                    let better = match &best {
                        None => true,
                        Some(e) => t < e.time || (t == e.time && (i, j) < (e.i, e.j)),
                    };
                    if better {
                        best = Some(PendingEvent { time: t, i, j });
                    }
                }
            }
        }
    }
    best
}

fn handle_contact(
    particles: &mut [Particle],
    state: &mut NanowireState,
    config: &AssemblyConfig,
    i: usize,
    j: usize,
) -> Result<()> {
    let tip_id = *state.chain.last().unwrap();
    let (stuck_id, free_id) = if particles[i].stuck {
        (Some(i), j)
    } else if particles[j].stuck {
        (Some(j), i)
    } else {
        (None, usize::MAX)
    };
    match stuck_id {
        Some(s) => {
            let tip_is_partner = s == tip_id;
            let receiver_reached = false; // completion handled by the caller
            if tip_is_partner && !receiver_reached && try_attach(state, particles, free_id, config)
            {
                return Ok(());
            }
            let stuck = particles[s];
            bounce_off_stuck(&mut particles[free_id], &stuck);
        }
        None => {
            let (a, b) = resolve_elastic_collision(&particles[i], &particles[j])?;
            particles[i] = a;
            particles[j] = b;
        }
    }
    Ok(())
}

/// RMS transverse offset of the chain (anchor excluded) from the
/// transmitter->receiver axis.
pub fn lateral_rms(state: &NanowireState, particles: &[Particle], config: &AssemblyConfig) -> f64 {
    let axis = (config.receiver_pos - config.transmitter_pos).normalized();
    let members: Vec<f64> = state
        .chain
        .iter()
        .skip(1)
        .map(|&id| {
            let rel = particles[id].position - config.transmitter_pos;
            let lat = rel - axis * rel.dot(axis);
            lat.norm_sq()
        })
        .collect();
    if members.is_empty() {
        return 0.0;
    }
    (members.iter().sum::<f64>() / members.len() as f64).sqrt()
}

/// Runs assembly and also returns the final particle set, for diagnostics
/// that need chain geometry.
pub fn run_assembly_with_particles(
    config: &AssemblyConfig,
) -> Result<(NanowireState, GrowthTrace, Vec<Particle>)> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut particles = seed_particles(config, &mut rng);
    let mut state = NanowireState {
        chain: vec![0],
        complete: false,
    };
    let mut trace = GrowthTrace::default();
    let capture_radius = 2.0 * config.particle_radius;
    let n_frames = (config.max_time / config.frame_dt).ceil() as usize;
    for frame in 0..n_frames {
        step_frame(&mut particles, &mut state, config)?;
        let t = (frame + 1) as f64 * config.frame_dt;
        let tip = particles[*state.chain.last().unwrap()].position;
        trace.samples.push(GrowthSample {
            time: t,
            tip_position: tip,
            chain_length: state.chain.len(),
        });
        if (tip - config.receiver_pos).norm() <= capture_radius {
            state.complete = true;
            break;
        }
    }
    Ok((state, trace, particles))
}
