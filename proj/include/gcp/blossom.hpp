#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace gcp::detail {

// Maximum-weight matching on a general graph with non-negative integer
// weights (Edmonds' blossom algorithm with O(n^3) dense bookkeeping).
// Weight 0 means "no edge". Vertices are 1-based internally.
class WeightedBlossom {
 public:
  explicit WeightedBlossom(int n)
      : n_(n), m_(2 * n + 1),
        g_(static_cast<std::size_t>(m_) * m_),
        lab_(m_, 0), match_(m_, 0), slack_(m_, 0), st_(m_, 0), pa_(m_, 0),
        flower_from_(static_cast<std::size_t>(m_) * (n + 1), 0), s_(m_, 0), vis_(m_, 0), flower_(m_) {
    for (int u = 1; u <= n_; ++u)
      for (int v = 1; v <= n_; ++v) g(u, v) = {u, v, 0};
  }

  // u, v are 0-based.
  void set_weight(int u, int v, std::int64_t w) {
    g(u + 1, v + 1).w = w;
    g(v + 1, u + 1).w = w;
  }

  // Returns mate (0-based, -1 if unmatched) for every vertex.
  std::vector<int> solve() {
    std::fill(match_.begin(), match_.end(), 0);
    n_x_ = n_;
    for (int u = 0; u <= n_; ++u) {
      st_[u] = u;
      flower_[u].clear();
    }
    std::int64_t w_max = 0;
    for (int u = 1; u <= n_; ++u)
      for (int v = 1; v <= n_; ++v) {
        ff(u, v) = (u == v ? u : 0);
        w_max = std::max(w_max, g(u, v).w);
      }
    for (int u = 1; u <= n_; ++u) lab_[u] = w_max;
    while (matching()) {
    }
    std::vector<int> mate(n_, -1);
    for (int u = 1; u <= n_; ++u)
      if (match_[u]) mate[u - 1] = match_[u] - 1;
    return mate;
  }

 private:
  struct E {
    int u, v;
    std::int64_t w;
  };
  static constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;

  E& g(int u, int v) { return g_[static_cast<std::size_t>(u) * m_ + v]; }
  int& ff(int b, int x) { return flower_from_[static_cast<std::size_t>(b) * (n_ + 1) + x]; }
  std::int64_t dist(const E& e) const { return lab_[e.u] + lab_[e.v] - e.w * 2; }

  void update_slack(int u, int x) {
    if (!slack_[x] || dist(g(u, x)) < dist(g(slack_[x], x))) slack_[x] = u;
  }
  void set_slack(int x) {
    slack_[x] = 0;
    for (int u = 1; u <= n_; ++u)
      if (g(u, x).w > 0 && st_[u] != x && s_[st_[u]] == 0) update_slack(u, x);
  }
  void q_push(int x) {
    if (x <= n_)
      q_.push(x);
    else
      for (int y : flower_[x]) q_push(y);
  }
  void set_st(int x, int b) {
    st_[x] = b;
    if (x > n_)
      for (int y : flower_[x]) set_st(y, b);
  }
  int get_pr(int b, int xr) {
    auto& f = flower_[b];
    int pr = static_cast<int>(std::find(f.begin(), f.end(), xr) - f.begin());
    if (pr % 2 == 1) {
      std::reverse(f.begin() + 1, f.end());
      return static_cast<int>(f.size()) - pr;
    }
    return pr;
  }
  void set_match(int u, int v) {
    match_[u] = g(u, v).v;
    if (u > n_) {
      E e = g(u, v);
      int xr = ff(u, e.u), pr = get_pr(u, xr);
      for (int i = 0; i < pr; ++i) set_match(flower_[u][i], flower_[u][i ^ 1]);
      set_match(xr, v);
      std::rotate(flower_[u].begin(), flower_[u].begin() + pr, flower_[u].end());
    }
  }
  void augment(int u, int v) {
    for (;;) {
      int xnv = st_[match_[u]];
      set_match(u, v);
      if (!xnv) return;
      set_match(xnv, st_[pa_[xnv]]);
      u = st_[pa_[xnv]];
      v = xnv;
    }
  }
  int get_lca(int u, int v) {
    for (++stamp_; u || v; std::swap(u, v)) {
      if (u == 0) continue;
      if (vis_[u] == stamp_) return u;
      vis_[u] = stamp_;
      u = st_[match_[u]];
      if (u) u = st_[pa_[u]];
    }
    return 0;
  }
  void add_blossom(int u, int lca, int v) {
    int b = n_ + 1;
    while (b <= n_x_ && st_[b]) ++b;
    if (b > n_x_) ++n_x_;
    lab_[b] = 0;
    s_[b] = 0;
    match_[b] = match_[lca];
    auto& f = flower_[b];
    f.clear();
    f.push_back(lca);
    for (int x = u, y; x != lca; x = st_[pa_[y]]) {
      f.push_back(x);
      f.push_back(y = st_[match_[x]]);
      q_push(y);
    }
    std::reverse(f.begin() + 1, f.end());
    for (int x = v, y; x != lca; x = st_[pa_[y]]) {
      f.push_back(x);
      f.push_back(y = st_[match_[x]]);
      q_push(y);
    }
    set_st(b, b);
    for (int x = 1; x <= n_x_; ++x) {
      g(b, x).w = 0;
      g(x, b).w = 0;
    }
    for (int x = 1; x <= n_; ++x) ff(b, x) = 0;
    for (int xs : f) {
      for (int x = 1; x <= n_x_; ++x)
        if (g(b, x).w == 0 || dist(g(xs, x)) < dist(g(b, x))) {
          g(b, x) = g(xs, x);
          g(x, b) = g(x, xs);
        }
      for (int x = 1; x <= n_; ++x)
        if (ff(xs, x)) ff(b, x) = xs;
    }
    set_slack(b);
  }
  void expand_blossom(int b) {
    for (int x : flower_[b]) set_st(x, x);
    int xr = ff(b, g(b, pa_[b]).u), pr = get_pr(b, xr);
    for (int i = 0; i < pr; i += 2) {
      int xs = flower_[b][i], xns = flower_[b][i + 1];
      pa_[xs] = g(xns, xs).u;
      s_[xs] = 1;
      s_[xns] = 0;
      slack_[xs] = 0;
      set_slack(xns);
      q_push(xns);
    }
    s_[xr] = 1;
    pa_[xr] = pa_[b];
    for (std::size_t i = pr + 1; i < flower_[b].size(); ++i) {
      int xs = flower_[b][i];
      s_[xs] = -1;
      set_slack(xs);
    }
    st_[b] = 0;
  }
  bool on_found_edge(const E& e) {
    int u = st_[e.u], v = st_[e.v];
    if (s_[v] == -1) {
      pa_[v] = e.u;
      s_[v] = 1;
      int nu = st_[match_[v]];
      slack_[v] = slack_[nu] = 0;
      s_[nu] = 0;
      q_push(nu);
    } else if (s_[v] == 0) {
      int lca = get_lca(u, v);
      if (!lca) {
        augment(u, v);
        augment(v, u);
        return true;
      }
      add_blossom(u, lca, v);
    }
    return false;
  }
  bool matching() {
    std::fill(s_.begin() + 1, s_.begin() + n_x_ + 1, -1);
    std::fill(slack_.begin() + 1, slack_.begin() + n_x_ + 1, 0);
    q_ = {};
    for (int x = 1; x <= n_x_; ++x)
      if (st_[x] == x && !match_[x]) {
        pa_[x] = 0;
        s_[x] = 0;
        q_push(x);
      }
    if (q_.empty()) return false;
    for (;;) {
      while (!q_.empty()) {
        int u = q_.front();
        q_.pop();
        if (s_[st_[u]] == 1) continue;
        for (int v = 1; v <= n_; ++v)
          if (g(u, v).w > 0 && st_[u] != st_[v]) {
            if (dist(g(u, v)) == 0) {
              if (on_found_edge(g(u, v))) return true;
            } else {
              update_slack(u, st_[v]);
            }
          }
      }
      std::int64_t d = inf;
      for (int b = n_ + 1; b <= n_x_; ++b)
        if (st_[b] == b && s_[b] == 1) d = std::min(d, lab_[b] / 2);
      for (int x = 1; x <= n_x_; ++x)
        if (st_[x] == x && slack_[x]) {
          if (s_[x] == -1)
            d = std::min(d, dist(g(slack_[x], x)));
          else if (s_[x] == 0)
            d = std::min(d, dist(g(slack_[x], x)) / 2);
        }
      for (int u = 1; u <= n_; ++u) {
        if (s_[st_[u]] == 0) {
          if (lab_[u] <= d) return false;
          lab_[u] -= d;
        } else if (s_[st_[u]] == 1) {
          lab_[u] += d;
        }
      }
      for (int b = n_ + 1; b <= n_x_; ++b)
        if (st_[b] == b) {
          if (s_[st_[b]] == 0)
            lab_[b] += d * 2;
          else if (s_[st_[b]] == 1)
            lab_[b] -= d * 2;
        }
      q_ = {};
      for (int x = 1; x <= n_x_; ++x)
        if (st_[x] == x && slack_[x] && st_[slack_[x]] != x && dist(g(slack_[x], x)) == 0)
          if (on_found_edge(g(slack_[x], x))) return true;
      for (int b = n_ + 1; b <= n_x_; ++b)
        if (st_[b] == b && s_[b] == 1 && lab_[b] == 0) expand_blossom(b);
    }
  }

  int n_;
  int m_;
  int n_x_ = 0;
  std::vector<E> g_;
  std::vector<std::int64_t> lab_;
  std::vector<int> match_, slack_, st_, pa_;
  std::vector<int> flower_from_;
  std::vector<int> s_, vis_;
  std::vector<std::vector<int>> flower_;
  std::queue<int> q_;
  int stamp_ = 0;
};

}  // namespace gcp::detail
