//! Set partitions via restricted growth strings.

/// Calls `f` with each partition of `0..n` as block masks, blocks ordered by smallest element.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[u64])) {
    if n == 0 {
        f(&[]);
        return;
    }
    let mut a = vec![0usize; n];
    let mut blocks: Vec<u64> = Vec::with_capacity(n);
    loop {
        let k = a.iter().max().map_or(0, |&m| m + 1);
        blocks.clear();
        blocks.resize(k, 0);
        for (i, &b) in a.iter().enumerate() {
            blocks[b] |= 1 << i;
        }
        f(&blocks);
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= max_prefix {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}
