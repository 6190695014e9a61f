// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the spectraface Project.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spectraface
{

/// Items per chunk. Chunk boundaries depend only on the item count, so any
/// per-chunk reduction combined in chunk order is independent of the number
/// of workers.
inline constexpr std::size_t kChunkSize = 256;

inline std::size_t chunk_count( std::size_t items )
{
    return ( items + kChunkSize - 1 ) / kChunkSize;
}

/// Calls fn(i) for every i in [0, count). `threads` <= 0 means one worker per
/// hardware thread. The first exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for( std::size_t count, int threads, Fn &&fn )
{
    if ( threads <= 0 )
        threads = static_cast<int>( std::max( 1u, std::thread::hardware_concurrency() ) );
    const std::size_t workers = std::min<std::size_t>( static_cast<std::size_t>( threads ), count );
    if ( workers <= 1 )
    {
        for ( std::size_t i = 0; i < count; ++i )
            fn( i );
        return;
    }

    std::atomic<std::size_t> next{ 0 };
    std::exception_ptr       error;
    std::mutex               error_mutex;
    std::vector<std::thread> pool;
    pool.reserve( workers );
    for ( std::size_t w = 0; w < workers; ++w )
        pool.emplace_back( [&] {
            for ( std::size_t i = next++; i < count; i = next++ )
            {
                try
                {
                    fn( i );
                }
                catch ( ... )
                {
                    std::lock_guard lock( error_mutex );
                    if ( !error )
                        error = std::current_exception();
                }
            }
        } );
    for ( auto &t: pool )
        t.join();
    if ( error )
        std::rethrow_exception( error );
}

/// Calls fn(chunk, begin, end) for every chunk of [0, items).
template <typename Fn>
void parallel_chunks( std::size_t items, int threads, Fn &&fn )
{
    parallel_for( chunk_count( items ), threads, [&]( std::size_t c ) {
        fn( c, c * kChunkSize, std::min( items, ( c + 1 ) * kChunkSize ) );
    } );
}

} // namespace spectraface
