use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qsdc_core::adversary::{AdversaryStrategy, ChannelModel};
use qsdc_core::montecarlo::{Campaign, Execution};
use qsdc_core::protocol::{BitString, Protocol, ProtocolConfig, Thresholds};

fn config() -> ProtocolConfig {
    let bits = |s: &str| s.parse::<BitString>().unwrap();
    ProtocolConfig {
        message: bits("0110100111010010"),
        bob_message: Some(bits("1001011000101101")),
        identity_alice: bits("10110010"),
        identity_bob: bits("01110100"),
        check_bits: 4,
        decoys: 8,
        fresh_decoys: 8,
        thresholds: Thresholds::default(),
        sacrificed_pairs: 32,
    }
}

fn campaigns(c: &mut Criterion) {
    let cfg = config();
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for trials in [256u64, 2048] {
        group.throughput(Throughput::Elements(trials));
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            let campaign = Campaign {
                protocol: Protocol::Qd,
                config: &cfg,
                adversary: AdversaryStrategy::ImpersonateBob,
                channel: ChannelModel::uniform(0.05).unwrap(),
                master_seed: 1,
                trials,
            };
            group.bench_with_input(BenchmarkId::new(name, trials), &campaign, |b, campaign| {
                b.iter(|| campaign.run(exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, campaigns);
criterion_main!(benches);
