#include "ici/simcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <string>
#include <tuple>

#include "ici/errors.hpp"
#include "ici/rng.hpp"

namespace ici {

namespace {

constexpr uint32_t kHeadBit = 1u << 30;
constexpr uint32_t kTailBit = 1u << 31;
constexpr uint32_t kPidMask = kHeadBit - 1;
constexpr int kMaxVcs = 8;
constexpr int kMaxBuf = 8;
constexpr int kLatBins = 1 << 17;

struct PacketRec {
    int src = 0;
    int dst = 0;
    int flits = 0;
    long long inject_cycle = 0;
    uint16_t hops = 0;
    uint8_t dst_core = 0;
    uint8_t measured = 0;
};

struct Ev {
    int32_t chan = 0;   // arrival: input side; credit: output side
    uint32_t flit = 0;  // credit: bit0 = release vc ownership
    uint8_t type = 0;   // 0 arrival, 1 credit
    uint8_t vc = 0;
};

enum class Mode { synthetic, single, trace };

// One simulation run. Input units and output ports are identified with the
// directed channel they serve, ordered like build_cdg(t).channels.
class Engine {
  public:
    Engine(const Topology& t, const RoutingTable& table, const TechParams& tech,
           const RateTable& rates, const SimParams& sp)
        : t_(t), table_(table), sp_(sp), n_(t.count()), ncores_(tech.cores_per_chiplet) {
        if (table.n_sites != n_)
            throw IntegrityError("routing table does not match the topology");
        if (sp.vcs < 1 || sp.vcs > kMaxVcs)
            throw ValidationError("vcs must lie in [1, 8]");
        if (sp.buf_flits_per_vc < 1 || sp.buf_flits_per_vc > kMaxBuf)
            throw ValidationError("buf_flits_per_vc must lie in [1, 8]");
        if (ncores_ < 1 || ncores_ > 56)
            throw ValidationError("cores_per_chiplet must lie in [1, 56]");
        V_ = sp.vcs;
        cap_ = sp.buf_flits_per_vc;

        // channels sorted by (from, to), matching build_cdg
        for (const Link& l : t.links) {
            chans_.push_back({l.a, l.b, link_latency_cycles(tech, l.length_mm)});
            chans_.push_back({l.b, l.a, link_latency_cycles(tech, l.length_mm)});
        }
        std::sort(chans_.begin(), chans_.end(), [](const Chan& x, const Chan& y) {
            return std::tie(x.from, x.to) < std::tie(y.from, y.to);
        });
        nch_ = static_cast<int>(chans_.size());

        in_chans_.assign(n_, {});
        out_chans_.assign(n_, {});
        for (int c = 0; c < nch_; ++c) {
            out_chans_[chans_[c].from].push_back(c);
            in_chans_[chans_[c].to].push_back(c);
        }
        for (auto& v : in_chans_) std::sort(v.begin(), v.end());
        in_local_.assign(nch_, 0);
        max_wire_ = 0;
        for (int r = 0; r < n_; ++r) {
            if (static_cast<int>(in_chans_[r].size()) + ncores_ > 64)
                throw ValidationError("router degree plus cores exceeds 64 ports");
            for (int i = 0; i < static_cast<int>(in_chans_[r].size()); ++i)
                in_local_[in_chans_[r][i]] = i;
        }
        for (const Chan& c : chans_) max_wire_ = std::max(max_wire_, c.wire);

        int horizon = sp.router_latency_cycles + 2 * sp.phy_latency_cycles + max_wire_ + 2;
        wheel_bits_ = 4;
        while ((1 << wheel_bits_) < horizon + 1) ++wheel_bits_;
        wheel_.assign(1ull << wheel_bits_, {});

        invc_buf_.assign(static_cast<size_t>(nch_) * V_ * cap_, 0);
        invc_head_.assign(static_cast<size_t>(nch_) * V_, 0);
        invc_count_.assign(static_cast<size_t>(nch_) * V_, 0);
        invc_outport_.assign(static_cast<size_t>(nch_) * V_, -1);
        invc_outvc_.assign(static_cast<size_t>(nch_) * V_, -1);
        credits_.assign(static_cast<size_t>(nch_) * V_, static_cast<uint8_t>(cap_));
        owned_.assign(static_cast<size_t>(nch_) * V_, 0);
        rr_in_.assign(nch_, 0);
        rr_out_.assign(nch_, 0);
        rr_eject_.assign(static_cast<size_t>(n_) * ncores_, 0);
        inj_q_.assign(static_cast<size_t>(n_) * ncores_, {});
        inj_outport_.assign(static_cast<size_t>(n_) * ncores_, -1);
        inj_outvc_.assign(static_cast<size_t>(n_) * ncores_, -1);
        inj_sent_.assign(static_cast<size_t>(n_) * ncores_, 0);
        busy_.assign(n_, 0);
        active_now_.assign((n_ + 63) / 64, 0);
        active_next_.assign((n_ + 63) / 64, 0);
        ch_flits_.assign(nch_, 0);
        lat_hist_.assign(kLatBins, 0);

        int radix = 0;
        for (int r = 0; r < n_; ++r)
            radix = std::max(radix, static_cast<int>(out_chans_[r].size()));
        flit_bits_ = radix > 0 ? flit_bits(tech, rates, radix, t.max_length_mm()) : 0.0;
        t_cycle_ns_ = tech.cycle_time_ns;
    }

    SimStats run_synthetic(const TrafficGen& gen, double injection_rate) {
        mode_ = Mode::synthetic;
        double p = injection_rate / sp_.packet_flits;
        long long measure_end = sp_.warmup_cycles + sp_.measure_cycles;
        Rng rng(mix_seed(sp_.seed, 0x73796e7468ull));
        if (p > 0.0) {
            for (int s : gen.injecting_sites())
                for (int c = 0; c < ncores_; ++c) {
                    uint64_t first = rng.geometric_gap(p);
                    long long at = static_cast<long long>(first) - 1;
                    if (first != Rng::no_event && at < measure_end)
                        inj_heap_.push({at, s * ncores_ + c});
                }
        }
        inj_cores_ = static_cast<long long>(gen.injecting_sites().size()) * ncores_;
        gen_ = &gen;
        gen_p_ = p;
        rng_ = std::move(rng);
        return main_loop(measure_end, measure_end + sp_.drain_cycle_cap);
    }

    SimStats run_single(int src, int dst, int flits) {
        mode_ = Mode::single;
        inj_cores_ = 1;
        uint32_t pid = alloc_packet();
        pool_[pid] = {src, dst, flits, 0, 0, 0, 1};
        push_injection(src, 0, pid);
        ++generated_flits_;
        // no measurement window: everything counts, run until delivered
        return main_loop(0, 1ll << 40);
    }

    SimStats run_trace(const Trace& trace, long long cycle_cap) {
        mode_ = Mode::trace;
        trace_ = &trace;
        trace_cap_ = cycle_cap;
        inj_cores_ = static_cast<long long>(n_) * ncores_;
        return main_loop(cycle_cap, cycle_cap + sp_.drain_cycle_cap);
    }

  private:
    struct Chan {
        int from, to, wire;
    };

    // ---- packet pool -------------------------------------------------------
    uint32_t alloc_packet() {
        if (!free_pids_.empty()) {
            uint32_t pid = free_pids_.back();
            free_pids_.pop_back();
            return pid;
        }
        pool_.push_back({});
        if (pool_.size() > kPidMask)
            throw IntegrityError("packet pool exhausted");
        return static_cast<uint32_t>(pool_.size() - 1);
    }

    void push_injection(int site, int core, uint32_t pid) {
        inj_q_[static_cast<size_t>(site) * ncores_ + core].push_back(pid);
        busy_[site] |= 1ull << (in_chans_[site].size() + core);
        activate(site);
    }

    void activate(int router) { active_next_[router >> 6] |= 1ull << (router & 63); }

    void schedule(long long cycle, const Ev& ev) {
        wheel_[cycle & ((1ll << wheel_bits_) - 1)].push_back(ev);
        ++wheel_pending_;
    }

    // ---- per-cycle structure ----------------------------------------------
    SimStats main_loop(long long measure_end, long long drain_deadline) {
        long long cycle = 0;
        bool drained_queues = false;
        while (true) {
            if (cycle >= drain_deadline) break;
            if (!drained_queues && cycle >= measure_end && mode_ != Mode::single) {
                drop_source_queues();
                drained_queues = true;
            }
            bool active_empty = true;
            for (uint64_t w : active_next_)
                if (w) {
                    active_empty = false;
                    break;
                }
            if (active_empty && wheel_pending_ == 0) {
                if (in_network_ == 0 && (drained_queues || mode_ == Mode::single)) {
                    bool idle = mode_ != Mode::single || live_packets_ == 0;
                    if (mode_ == Mode::trace && trace_cursor_ < trace_->records.size() &&
                        static_cast<long long>(trace_->records[trace_cursor_].cycle) < trace_cap_)
                        idle = false;
                    if (idle) break;
                }
                // idle gap: jump to the next scheduled activity
                long long nxt = drain_deadline;
                if (!inj_heap_.empty()) nxt = std::min(nxt, inj_heap_.top().first);
                if (mode_ == Mode::trace && trace_cursor_ < trace_->records.size())
                    nxt = std::min(nxt, std::max(cycle,
                        static_cast<long long>(trace_->records[trace_cursor_].cycle)));
                if (!drained_queues && mode_ != Mode::single)
                    nxt = std::min(nxt, measure_end);
                if (nxt > cycle) {
                    cycle = nxt;
                    continue;
                }
            }

            // events scheduled for this cycle
            auto& slot = wheel_[cycle & ((1ll << wheel_bits_) - 1)];
            if (!slot.empty()) {
                for (const Ev& ev : slot) apply_event(ev);
                wheel_pending_ -= static_cast<long long>(slot.size());
                slot.clear();
            }

            // new traffic
            if (mode_ == Mode::synthetic && !drained_queues) inject_synthetic(cycle, measure_end);
            if (mode_ == Mode::trace) inject_trace(cycle);

            // routers
            std::swap(active_now_, active_next_);
            std::fill(active_next_.begin(), active_next_.end(), 0);
            for (int w = 0; w < static_cast<int>(active_now_.size()); ++w) {
                uint64_t bits = active_now_[w];
                while (bits) {
                    int r = (w << 6) + std::countr_zero(bits);
                    bits &= bits - 1;
                    process_router(r, cycle, measure_end);
                }
            }
            ++cycle;
        }

        SimStats st;
        st.deadlock_flag = in_network_ > 0;
        long long denom = inj_cores_ * std::max<long long>(1, sp_.measure_cycles);
        if (mode_ != Mode::synthetic) denom = inj_cores_ * std::max<long long>(1, measure_end);
        st.offered_rate = static_cast<double>(generated_flits_) / static_cast<double>(denom);
        st.accepted_rate = static_cast<double>(delivered_flits_) / static_cast<double>(denom);
        st.delivered_packets = delivered_packets_;
        if (delivered_packets_ > 0) {
            st.avg_latency_ns = lat_sum_ / static_cast<double>(delivered_packets_) * t_cycle_ns_;
            st.avg_hops = static_cast<double>(hop_sum_) / static_cast<double>(delivered_packets_);
            long long want = delivered_packets_ - (delivered_packets_ * 99) / 100;
            long long seen = lat_overflow_;
            int bin = kLatBins - 1;
            for (; bin >= 0 && seen < want; --bin) seen += lat_hist_[bin];
            st.p99_latency_ns = (bin + 1) * t_cycle_ns_;
        }
        st.per_channel_bits.resize(nch_);
        for (int c = 0; c < nch_; ++c)
            st.per_channel_bits[c] = static_cast<double>(ch_flits_[c]) * flit_bits_;
        return st;
    }

    void apply_event(const Ev& ev) {
        size_t slot = static_cast<size_t>(ev.chan) * V_ + ev.vc;
        if (ev.type == 0) { // arrival into the input buffer at chans_[chan].to
            if (invc_count_[slot] >= cap_) throw IntegrityError("vc buffer overflow");
            size_t base = slot * cap_;
            invc_buf_[base + ((invc_head_[slot] + invc_count_[slot]) % cap_)] = ev.flit;
            ++invc_count_[slot];
            int r = chans_[ev.chan].to;
            busy_[r] |= 1ull << in_local_[ev.chan];
            activate(r);
        } else { // credit back at chans_[chan].from
            if (credits_[slot] >= cap_) throw IntegrityError("credit overflow");
            ++credits_[slot];
            activate(chans_[ev.chan].from);
        }
    }

    void inject_synthetic(long long cycle, long long measure_end) {
        while (!inj_heap_.empty() && inj_heap_.top().first <= cycle) {
            auto [when, core_g] = inj_heap_.top();
            inj_heap_.pop();
            int site = core_g / ncores_;
            int core = core_g % ncores_;
            uint32_t pid = alloc_packet();
            bool measured = when >= sp_.warmup_cycles && when < measure_end;
            pool_[pid] = {site, gen_->destination(site, rng_),
                          sp_.packet_flits, when, 0,
                          static_cast<uint8_t>(rng_.below(ncores_)),
                          static_cast<uint8_t>(measured)};
            ++live_packets_;
            if (measured) generated_flits_ += sp_.packet_flits;
            push_injection(site, core, pid);
            uint64_t gap = rng_.geometric_gap(gen_p_);
            long long at = when + static_cast<long long>(gap);
            if (gap != Rng::no_event && at < measure_end) inj_heap_.push({at, core_g});
        }
    }

    void inject_trace(long long cycle) {
        const auto& recs = trace_->records;
        while (trace_cursor_ < recs.size() &&
               static_cast<long long>(recs[trace_cursor_].cycle) <= cycle) {
            const TraceRecord& rec = recs[trace_cursor_];
            if (rec.cycle >= trace_cap_) {
                trace_cursor_ = recs.size();
                break;
            }
            ++trace_cursor_;
            int flits = 1;
            if (rec.is_data) {
                if (flit_bits_ <= 0.0)
                    throw ValidationError("links carry no payload at this length; "
                                          "cannot size data packets");
                flits = std::max(1ll, static_cast<long long>(
                                          std::ceil(rec.bytes * 8.0 / flit_bits_)));
            }
            uint32_t pid = alloc_packet();
            pool_[pid] = {rec.src, rec.dst, flits, std::max(cycle, rec.cycle),
                          0, 0, 1};
            ++live_packets_;
            generated_flits_ += flits;
            push_injection(rec.src, 0, pid);
        }
    }

    void drop_source_queues() {
        for (int r = 0; r < n_; ++r) {
            for (int c = 0; c < ncores_; ++c) {
                auto& q = inj_q_[static_cast<size_t>(r) * ncores_ + c];
                size_t qi = static_cast<size_t>(r) * ncores_ + c;
                // the front packet may be mid-flight; it stays
                size_t keep = (inj_sent_[qi] > 0 && !q.empty()) ? 1 : 0;
                if (keep == 0 && !q.empty() && inj_outport_[qi] >= 0) {
                    // routed but nothing sent yet: give back the claimed vc
                    owned_[static_cast<size_t>(inj_outport_[qi]) * V_ + inj_outvc_[qi]] = 0;
                }
                if (keep == 0) {
                    inj_outport_[qi] = -1;
                    inj_outvc_[qi] = -1;
                }
                while (q.size() > keep) {
                    uint32_t pid = q.back();
                    q.pop_back();
                    --live_packets_;
                    free_pids_.push_back(pid);
                }
                if (q.empty()) busy_[r] &= ~(1ull << (in_chans_[r].size() + c));
            }
            if (busy_[r]) activate(r);
        }
        while (!inj_heap_.empty()) inj_heap_.pop();
    }

    // negative outport encoding for ejection: -(2 + core)
    static int eject_port(int core) { return -(2 + core); }

    void process_router(int r, long long cycle, long long measure_end) {
        uint64_t busy = busy_[r];
        if (!busy) return;
        int n_in = static_cast<int>(in_chans_[r].size());
        int n_out = static_cast<int>(out_chans_[r].size());

        uint64_t touched = 0;
        int8_t nom_in[64];
        int8_t nom_vc[64];
        uint8_t nom_dist[64];

        uint64_t scan = busy;
        while (scan) {
            int i = std::countr_zero(scan);
            scan &= scan - 1;
            int out_local = -1;
            int8_t vc_pick = -1;
            if (i < n_in) {
                int cin = in_chans_[r][i];
                size_t base = static_cast<size_t>(cin) * V_;
                int start = rr_in_[cin];
                for (int k = 0; k < V_; ++k) {
                    int v = (start + k) % V_;
                    size_t slot = base + v;
                    if (invc_count_[slot] == 0) continue;
                    if (invc_outport_[slot] == -1 &&
                        !route_head(r, slot, invc_buf_[slot * cap_ + invc_head_[slot]]))
                        continue;
                    int outp = invc_outport_[slot];
                    if (outp >= 0 &&
                        credits_[static_cast<size_t>(outp) * V_ + invc_outvc_[slot]] == 0)
                        continue;
                    out_local = outp >= 0 ? chan_out_local(r, outp)
                                          : n_out + (-outp - 2);
                    vc_pick = static_cast<int8_t>(v);
                    break;
                }
            } else {
                int core = i - n_in;
                size_t qi = static_cast<size_t>(r) * ncores_ + core;
                if (inj_q_[qi].empty()) continue;
                if (inj_outport_[qi] == -1 && !route_injection(r, qi)) continue;
                int outp = inj_outport_[qi];
                if (outp >= 0 &&
                    credits_[static_cast<size_t>(outp) * V_ + inj_outvc_[qi]] == 0)
                    continue;
                out_local = outp >= 0 ? chan_out_local(r, outp) : n_out + (-outp - 2);
                vc_pick = 0;
            }
            if (out_local < 0) continue;
            uint8_t rr = out_local < n_out
                             ? rr_out_[out_chans_[r][out_local]]
                             : rr_eject_[static_cast<size_t>(r) * ncores_ + (out_local - n_out)];
            uint8_t dist = static_cast<uint8_t>((i - rr) & 63);
            uint64_t bit = 1ull << out_local;
            if (!(touched & bit) || dist < nom_dist[out_local]) {
                touched |= bit;
                nom_in[out_local] = static_cast<int8_t>(i);
                nom_vc[out_local] = vc_pick;
                nom_dist[out_local] = dist;
            }
        }

        bool in_window = cycle >= sp_.warmup_cycles && cycle < measure_end;
        if (mode_ != Mode::synthetic) in_window = true;
        while (touched) {
            int o = std::countr_zero(touched);
            touched &= touched - 1;
            grant(r, o, nom_in[o], nom_vc[o], cycle, in_window);
        }
        if (busy_[r]) activate(r);
    }

    // Route + virtual-channel allocation for the head flit in an input vc.
    bool route_head(int r, size_t slot, uint32_t flit) {
        if (!(flit & kHeadBit)) throw IntegrityError("body flit at the head of a vc");
        const PacketRec& pkt = pool_[flit & kPidMask];
        if (pkt.dst == r) {
            invc_outport_[slot] = eject_port(pkt.dst_core);
            return true;
        }
        int nxt = table_.next_hop(r, pkt.dst);
        if (nxt < 0) throw IntegrityError("routing table has no entry");
        int cout = out_chan(r, nxt);
        int v2 = alloc_vc(cout);
        if (v2 < 0) return false;
        invc_outport_[slot] = cout;
        invc_outvc_[slot] = static_cast<int8_t>(v2);
        return true;
    }

    bool route_injection(int r, size_t qi) {
        const PacketRec& pkt = pool_[inj_q_[qi].front()];
        if (pkt.dst == r) {
            inj_outport_[qi] = eject_port(pkt.dst_core);
            return true;
        }
        int nxt = table_.next_hop(r, pkt.dst);
        if (nxt < 0) throw IntegrityError("routing table has no entry");
        int cout = out_chan(r, nxt);
        int v2 = alloc_vc(cout);
        if (v2 < 0) return false;
        inj_outport_[qi] = cout;
        inj_outvc_[qi] = static_cast<int8_t>(v2);
        return true;
    }

    int alloc_vc(int chan) {
        size_t base = static_cast<size_t>(chan) * V_;
        for (int v = 0; v < V_; ++v)
            if (!owned_[base + v] && credits_[base + v] > 0) {
                owned_[base + v] = 1;
                return v;
            }
        return -1;
    }

    int out_chan(int r, int neighbor) const {
        const auto& outs = out_chans_[r];
        int lo = 0, hi = static_cast<int>(outs.size());
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (chans_[outs[mid]].to < neighbor)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo >= static_cast<int>(outs.size()) || chans_[outs[lo]].to != neighbor)
            throw IntegrityError("route uses a missing link");
        return outs[lo];
    }

    int chan_out_local(int r, int chan) const {
        const auto& outs = out_chans_[r];
        int lo = 0, hi = static_cast<int>(outs.size());
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (outs[mid] < chan)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

    void grant(int r, int out_local, int in_local, int vc, long long cycle,
               bool in_window) {
        int n_in = static_cast<int>(in_chans_[r].size());
        int n_out = static_cast<int>(out_chans_[r].size());
        uint32_t flit;
        int outp, outvc = -1;

        if (in_local < n_in) {
            int cin = in_chans_[r][in_local];
            size_t slot = static_cast<size_t>(cin) * V_ + vc;
            size_t base = slot * cap_;
            flit = invc_buf_[base + invc_head_[slot]];
            invc_head_[slot] = static_cast<uint8_t>((invc_head_[slot] + 1) % cap_);
            --invc_count_[slot];
            outp = invc_outport_[slot];
            outvc = invc_outvc_[slot];
            // freed buffer slot: credit to the upstream side of cin
            schedule(cycle + 2 * sp_.phy_latency_cycles + chans_[cin].wire,
                     {cin, 0u, 1, static_cast<uint8_t>(vc)});
            if (flit & kTailBit) {
                invc_outport_[slot] = -1;
                invc_outvc_[slot] = -1;
            }
            bool any = false;
            size_t cbase = static_cast<size_t>(cin) * V_;
            for (int v = 0; v < V_ && !any; ++v) any = invc_count_[cbase + v] > 0;
            if (!any) busy_[r] &= ~(1ull << in_local);
            rr_in_[cin] = static_cast<uint8_t>((vc + 1) % V_);
        } else {
            int core = in_local - n_in;
            size_t qi = static_cast<size_t>(r) * ncores_ + core;
            uint32_t pid = inj_q_[qi].front();
            const PacketRec& pkt = pool_[pid];
            int seq = inj_sent_[qi];
            flit = pid | (seq == 0 ? kHeadBit : 0u) |
                   (seq == pkt.flits - 1 ? kTailBit : 0u);
            outp = inj_outport_[qi];
            outvc = inj_outvc_[qi];
            ++inj_sent_[qi];
            ++in_network_;
            if (flit & kTailBit) {
                inj_q_[qi].pop_front();
                inj_sent_[qi] = 0;
                inj_outport_[qi] = -1;
                inj_outvc_[qi] = -1;
                if (inj_q_[qi].empty()) busy_[r] &= ~(1ull << in_local);
            }
        }

        if (outp >= 0) { // physical channel
            size_t oslot = static_cast<size_t>(outp) * V_ + outvc;
            if (credits_[oslot] == 0) throw IntegrityError("grant without credit");
            --credits_[oslot];
            // flits stay in order on the wire, so the vc can take a new
            // packet as soon as the tail is on its way
            if (flit & kTailBit) owned_[oslot] = 0;
            if (flit & kHeadBit) ++pool_[flit & kPidMask].hops;
            if (in_window) ++ch_flits_[outp];
            schedule(cycle + sp_.router_latency_cycles + 2 * sp_.phy_latency_cycles +
                         chans_[outp].wire,
                     {outp, flit, 0, static_cast<uint8_t>(outvc)});
            rr_out_[outp] = static_cast<uint8_t>((in_local + 1) & 63);
        } else { // ejection: the flit leaves the fabric
            int core = -outp - 2;
            --in_network_;
            if (flit & kTailBit) {
                uint32_t pid = flit & kPidMask;
                PacketRec& pkt = pool_[pid];
                long long lat = cycle + sp_.router_latency_cycles - pkt.inject_cycle;
                if (pkt.measured) {
                    ++delivered_packets_;
                    delivered_flits_ += pkt.flits;
                    lat_sum_ += static_cast<double>(lat);
                    hop_sum_ += pkt.hops;
                    if (lat < kLatBins)
                        ++lat_hist_[lat];
                    else
                        ++lat_overflow_;
                }
                --live_packets_;
                free_pids_.push_back(pid);
            }
            rr_eject_[static_cast<size_t>(r) * ncores_ + core] =
                static_cast<uint8_t>((in_local + 1) & 63);
        }
    }

    // ---- members -----------------------------------------------------------
    const Topology& t_;
    const RoutingTable& table_;
    SimParams sp_;
    int n_, ncores_, V_ = 4, cap_ = 4, nch_ = 0, max_wire_ = 0, wheel_bits_ = 4;
    double flit_bits_ = 0.0, t_cycle_ns_ = 1.0;

    std::vector<Chan> chans_;
    std::vector<std::vector<int>> in_chans_, out_chans_;
    std::vector<int> in_local_;

    std::vector<uint32_t> invc_buf_;
    std::vector<uint8_t> invc_head_, invc_count_;
    std::vector<int32_t> invc_outport_;
    std::vector<int8_t> invc_outvc_;
    std::vector<uint8_t> credits_, owned_;
    std::vector<uint8_t> rr_in_, rr_out_, rr_eject_;

    std::vector<std::deque<uint32_t>> inj_q_;
    std::vector<int32_t> inj_outport_;
    std::vector<int8_t> inj_outvc_;
    std::vector<int32_t> inj_sent_;

    std::vector<uint64_t> busy_, active_now_, active_next_;
    std::vector<std::vector<Ev>> wheel_;
    long long wheel_pending_ = 0;

    std::vector<PacketRec> pool_;
    std::vector<uint32_t> free_pids_;
    long long live_packets_ = 0, in_network_ = 0;

    std::priority_queue<std::pair<long long, int>,
                        std::vector<std::pair<long long, int>>,
                        std::greater<>> inj_heap_;
    const TrafficGen* gen_ = nullptr;
    double gen_p_ = 0.0;
    Rng rng_{0};
    Mode mode_ = Mode::synthetic;
    const Trace* trace_ = nullptr;
    size_t trace_cursor_ = 0;
    long long trace_cap_ = 0;
    long long inj_cores_ = 1;

    long long generated_flits_ = 0, delivered_flits_ = 0, delivered_packets_ = 0;
    double lat_sum_ = 0.0;
    long long hop_sum_ = 0, lat_overflow_ = 0;
    std::vector<uint32_t> lat_hist_;
    std::vector<long long> ch_flits_;
};

} // namespace

SimStats simulate(const Topology& t, const RoutingTable& table,
                  const TechParams& tech, const RateTable& rates,
                  const TrafficSpec& traffic, const SimParams& sp,
                  double injection_rate) {
    if (injection_rate < 0.0 || injection_rate > 1.0)
        throw ValidationError("injection rate must lie in [0, 1]");
    if (table.n_sites != t.count())
        throw IntegrityError("routing table does not match the topology");
    if (traffic.pattern == TrafficPattern::trace)
        throw ValidationError("trace traffic needs replay_trace");
    TrafficGen gen(t.placement, traffic, sp.seed);
    Engine eng(t, table, tech, rates, sp);
    return eng.run_synthetic(gen, injection_rate);
}

double zero_load_avg_latency_ns(const Topology& t, const RoutingTable& table,
                                const TechParams& tech, const TrafficSpec& traffic,
                                int packet_flits, uint64_t seed) {
    int n = t.count();
    std::map<std::pair<int, int>, int> wire;
    for (const Link& l : t.links) {
        int w = link_latency_cycles(tech, l.length_mm);
        wire[{l.a, l.b}] = w;
        wire[{l.b, l.a}] = w;
    }
    long long lr = std::llround(tech.router_latency_ns / tech.cycle_time_ns);
    long long lp = std::llround(tech.phy_latency_ns / tech.cycle_time_ns);
    auto pair_latency = [&](int s, int d) {
        std::vector<int> route = table.route(s, d);
        long long h = static_cast<long long>(route.size()) - 1;
        long long cycles = (h + 1) * lr + h * 2 * lp + packet_flits - 1;
        for (int i = 0; i + 1 < static_cast<int>(route.size()); ++i)
            cycles += wire.at({route[i], route[i + 1]});
        return static_cast<double>(cycles);
    };

    double sum = 0.0, weight = 0.0;
    TrafficGen gen(t.placement, traffic, seed);
    switch (traffic.pattern) {
        case TrafficPattern::uniform:
        case TrafficPattern::trace:
            for (int s = 0; s < n; ++s)
                for (int d = 0; d < n; ++d)
                    if (s != d) {
                        sum += pair_latency(s, d);
                        weight += 1.0;
                    }
            break;
        case TrafficPattern::permutation:
            for (int s = 0; s < n; ++s) {
                sum += pair_latency(s, gen.permutation_map()[s]);
                weight += 1.0;
            }
            break;
        case TrafficPattern::tornado:
        case TrafficPattern::neighbor: {
            Rng rng(seed);
            for (int s = 0; s < n; ++s) {
                sum += pair_latency(s, gen.destination(s, rng));
                weight += 1.0;
            }
            break;
        }
        case TrafficPattern::hetero_mix: {
            // expectation over the mix: p to memory, 1-p to other compute sites
            std::vector<int> mem, comp;
            for (const ChipletSite& site : t.placement.sites) {
                if (site.kind == ChipletKind::memory) mem.push_back(site.id);
                if (site.kind == ChipletKind::compute) comp.push_back(site.id);
            }
            double p = traffic.mix_core_to_mem;
            for (int s : comp) {
                for (int d : mem) {
                    sum += p / mem.size() * pair_latency(s, d);
                    weight += p / mem.size();
                }
                for (int d : comp)
                    if (d != s) {
                        double w = (1.0 - p) / (comp.size() - 1);
                        sum += w * pair_latency(s, d);
                        weight += w;
                    }
            }
            break;
        }
    }
    if (weight <= 0.0) throw ValidationError("traffic pattern has no pairs");
    return sum / weight * tech.cycle_time_ns;
}

double single_packet_latency_ns(const Topology& t, const RoutingTable& table,
                                const TechParams& tech, const RateTable& rates,
                                const SimParams& sp, int src, int dst, int flits) {
    if (src == dst) throw ValidationError("src and dst must differ");
    Engine eng(t, table, tech, rates, sp);
    SimStats st = eng.run_single(src, dst, flits);
    if (st.delivered_packets != 1) throw IntegrityError("single packet was not delivered");
    return st.avg_latency_ns;
}

SaturationResult find_saturation(const Topology& t, const RoutingTable& table,
                                 const TechParams& tech, const RateTable& rates,
                                 const TrafficSpec& traffic, const SimParams& sp) {
    SaturationResult res;
    double frac = rate_fraction(rates, t.max_length_mm());
    if (frac <= 0.0) {
        res.note = "links exceed the usable length; data rate is zero";
        return res;
    }
    double zero_load =
        zero_load_avg_latency_ns(t, table, tech, traffic, sp.packet_flits, sp.seed);
    auto sustained = [&](int k) {
        double rate = static_cast<double>(k) / sp.sat_resolution;
        SimStats st = simulate(t, table, tech, rates, traffic, sp, rate);
        if (st.deadlock_flag || st.delivered_packets == 0) return false;
        if (st.accepted_rate < sp.sat_accept_frac * st.offered_rate) return false;
        return st.avg_latency_ns < sp.sat_latency_mult * zero_load;
    };
    int lo = 0, hi = sp.sat_resolution;
    if (sustained(hi)) {
        res.rate = 1.0;
        return res;
    }
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (sustained(mid))
            lo = mid;
        else
            hi = mid;
    }
    res.rate = static_cast<double>(lo) / sp.sat_resolution;
    if (lo == 0) res.note = "no rate on the grid is sustained";
    return res;
}

SimStats replay_trace(const Topology& t, const RoutingTable& table,
                      const TechParams& tech, const RateTable& rates,
                      const Trace& trace, const SimParams& sp, long long cycle_cap) {
    if (table.n_sites != t.count())
        throw IntegrityError("routing table does not match the topology");
    for (const TraceRecord& r : trace.records)
        if (r.src < 0 || r.src >= t.count() || r.dst < 0 || r.dst >= t.count())
            throw IntegrityError("trace node " +
                                 std::to_string(r.src < 0 || r.src >= t.count() ? r.src : r.dst) +
                                 " outside the placement");
    Engine eng(t, table, tech, rates, sp);
    return eng.run_trace(trace, cycle_cap);
}

} // namespace ici
