#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace uqlab
{
	/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index runs exactly once;
	/// callers write results into per-index slots, so the outcome never depends on scheduling.
	/// The first exception thrown by any task is rethrown on the calling thread.
	template<typename Fn>
	void parallel_for(std::size_t count, std::size_t threads, Fn &&fn)
	{
		threads = std::max<std::size_t>(1, std::min(threads, count));
		if (threads <= 1)
		{
			for (std::size_t i = 0; i < count; i++)
				fn(i);
			return;
		}
		std::atomic<std::size_t> next { 0 };
		std::exception_ptr error;
		std::mutex error_mutex;
		auto worker = [&]()
		{
			for (std::size_t i = next++; i < count; i = next++)
			{
				try
				{
					fn(i);
				} catch (...)
				{
					std::lock_guard lock(error_mutex);
					if (!error)
						error = std::current_exception();
				}
			}
		};
		std::vector<std::thread> pool;
		for (std::size_t t = 0; t < threads; t++)
			pool.emplace_back(worker);
		for (auto &thread : pool)
			thread.join();
		if (error)
			std::rethrow_exception(error);
	}
}
